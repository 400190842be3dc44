#include "fmtk/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "fmtk/error.hpp"

namespace fmtk {

namespace {

constexpr double k16Pi2 = 16.0 * kPi * kPi;

void check_dims(const MomentSummary& mom, int n1, int n2) {
  if (mom.dim() != n1 || n1 != n2) throw Error(Errc::DimensionMismatch, "moments and matrices disagree on N");
}

// Top-left N×N block of M₁ΣM₂ᵀ, written with the blocks.
Mat cross_second_moment(const MomentSummary& mom, const Mat& a1, const Mat& b1, const Mat& a2, const Mat& b2) {
  return a1 * mom.X * a2.transpose() + b1 * mom.W * b2.transpose() + a1 * mom.CovXW * b2.transpose() +
         b1 * mom.CovXW.transpose() * a2.transpose();
}

double sq(double x) { return x * x; }

const Mat& sigma_of(const MomentSummary& mom) { return mom.Sigma; }

}  // namespace

double bound_componentwise(const MomentSummary& mom, const FreeSympMatrix& m1, const FreeSympMatrix& m2) {
  check_dims(mom, m1.n(), m2.n());
  const Mat comm = m1.A() * m2.B().transpose() - m1.B() * m2.A().transpose();
  const Mat cross = cross_second_moment(mom, m1.A(), m1.B(), m2.A(), m2.B());
  double s = 0.0;
  for (int j = 0; j < m1.n(); ++j) s += std::sqrt(sq(comm(j, j)) / k16Pi2 + sq(cross(j, j)));
  return s * s;
}

double trace_term(const MomentSummary& mom, const Mat& a1, const Mat& b1, const Mat& a2, const Mat& b2) {
  return (a2.transpose() * a1 * mom.X).trace() + (b1.transpose() * b2 * mom.W).trace() +
         ((a1.transpose() * b2 + a2.transpose() * b1) * mom.CovXW.transpose()).trace();
}

double bound_trace(const MomentSummary& mom, const FreeSympMatrix& m1, const FreeSympMatrix& m2) {
  check_dims(mom, m1.n(), m2.n());
  const double t = (m1.A().transpose() * m2.B() - m2.A().transpose() * m1.B()).trace();
  return t * t / k16Pi2 + sq(trace_term(mom, m1.A(), m1.B(), m2.A(), m2.B()));
}

double time_fmt_term(const MomentSummary& mom, const FreeSympMatrix& m) {
  return (m.A() * mom.X).trace() + (m.B() * mom.CovXW.transpose()).trace();
}

double bound_time_fmt(const MomentSummary& mom, const FreeSympMatrix& m) {
  check_dims(mom, m.n(), m.n());
  const double tb = m.B().trace();
  return tb * tb / k16Pi2 + sq(time_fmt_term(mom, m));
}

namespace {

void check_p(double p) {
  if (!(p >= 1.0 && p <= 2.0)) throw Error(Errc::InvalidArgument, "p must lie in [1, 2]", p);
}

}  // namespace

LpBound bound_lp_two_fmt(const MomentSummary& mom, const FreeSympMatrix& m1, const FreeSympMatrix& m2, double p,
                         double norm1, double norm2) {
  check_p(p);
  const Mat b3 = m2.B() * m1.A().transpose() - m2.A() * m1.B().transpose();
  const double det = std::abs(b3.determinant());
  const double e = 2.0 / p - 1.0;
  return {sq(norm1) * sq(norm2), (e == 0.0 ? 1.0 : std::pow(det, e)) * bound_trace(mom, m1, m2)};
}

LpBound bound_lp_time_fmt(const MomentSummary& mom, const FreeSympMatrix& m, double p, double xnorm,
                          double unorm) {
  check_p(p);
  const double e = 2.0 / p - 1.0;
  return {sq(xnorm) * sq(unorm), (e == 0.0 ? 1.0 : std::pow(m.abs_det_b, e)) * bound_time_fmt(mom, m)};
}

LpBound bound_lq_time_fmt(const MomentSummary& mom, const FreeSympMatrix& m, double p, double xnorm,
                          double unorm) {
  check_p(p);
  const double a = std::abs(m.B().trace()) / (4.0 * kPi);
  const double t = std::abs(time_fmt_term(mom, m));
  if (p == 1.0) return {xnorm * unorm, std::sqrt(m.abs_det_b) * std::max(a, t)};
  const double q = p / (p - 1.0);
  return {std::pow(xnorm * unorm, q), std::pow(m.abs_det_b, q / p - q / 2.0) * (std::pow(a, q) + std::pow(t, q))};
}

LpBound bound_lp_two_fmt(const SampledSignal& f, const FreeSympMatrix& m1, const FreeSympMatrix& m2, double p) {
  const MomentSummary mom = compute_moments(f);
  return bound_lp_two_fmt(mom, m1, m2, p, sheared_weighted_lp(fmt_sheared(m1, f), p),
                          sheared_weighted_lp(fmt_sheared(m2, f), p));
}

LpBound bound_lp_time_fmt(const SampledSignal& f, const FreeSympMatrix& m, double p) {
  const MomentSummary mom = compute_moments(f);
  return bound_lp_time_fmt(mom, m, p, weighted_lp(f, Weight{Weight::radius}, p),
                           sheared_weighted_lp(fmt_sheared(m, f), p));
}

LpBound bound_lq_time_fmt(const SampledSignal& f, const FreeSympMatrix& m, double p) {
  const MomentSummary mom = compute_moments(f);
  return bound_lq_time_fmt(mom, m, p, weighted_lp(f, Weight{Weight::radius}, p),
                           sheared_weighted_lp(fmt_sheared(m, f), p));
}

double bound_mo_component(const MomentSummary& mom, const SympMatrix& m1, const SympMatrix& m2) {
  check_dims(mom, m1.n(), m2.n());
  const int n = m1.n();
  const Mat mj = m1.matrix() * standard_j(n) * m2.matrix().transpose();
  const Mat ms = m1.matrix() * sigma_of(mom) * m2.matrix().transpose();
  double s = 0.0;
  for (int j = 0; j < n; ++j) s += std::sqrt(sq(mj(j, j)) / k16Pi2 + sq(ms(j, j)));
  return s * s;
}

double bound_mo_trace(const MomentSummary& mom, const SympMatrix& m1, const SympMatrix& m2) {
  check_dims(mom, m1.n(), m2.n());
  const int n = m1.n();
  const Mat mj = m1.matrix() * standard_j(n) * m2.matrix().transpose();
  const Mat ms = m1.matrix() * sigma_of(mom) * m2.matrix().transpose();
  double tj = 0.0, ts = 0.0;
  for (int j = 0; j < n; ++j) {
    tj += mj(j, j);
    ts += ms(j, j);
  }
  return tj * tj / k16Pi2 + ts * ts;
}

double bound_extra_strong_diag(const MomentSummary& mom, const SympMatrix& m1, const SympMatrix& m2) {
  check_dims(mom, m1.n(), m2.n());
  if (!is_diagonal(m1.A()) || !is_diagonal(m1.B()) || !is_diagonal(m2.A()) || !is_diagonal(m2.B())) {
    throw Error(Errc::DiagonalRequired, "extra-strong diagonal bound needs diagonal A and B blocks");
  }
  const int n = m1.n();
  const Mat mj = m1.matrix() * standard_j(n) * m2.matrix().transpose();
  const Mat ms = m1.matrix() * sigma_of(mom) * m2.matrix().transpose();
  double s = 0.0;
  for (int j = 0; j < n; ++j) {
    const double extra = 1.0 / k16Pi2 + sq(mom.cov_abs_per_pair(j, j)) - sq(mom.CovXW(j, j));
    s += std::sqrt(extra * sq(mj(j, j)) + sq(ms(j, j)));
  }
  return s * s;
}

std::optional<ScalarShape> scalar_shape(const SympMatrix& m1, const SympMatrix& m2) {
  const int n = m1.n();
  if (m2.n() != n) return std::nullopt;
  const Mat blocks[4] = {m1.A(), m1.B(), m2.A(), m2.B()};
  for (const auto& b : blocks) {
    if (!is_diagonal(b)) return std::nullopt;
  }
  // Pick S from the first axis where some block is nonzero on every axis.
  Vec sign = Vec::Zero(n);
  double scalars[4] = {0, 0, 0, 0};
  for (int k = 0; k < 4; ++k) {
    double mag = std::abs(blocks[k](0, 0));
    for (int j = 1; j < n; ++j) {
      if (std::abs(std::abs(blocks[k](j, j)) - mag) > 1e-12 * std::max(1.0, mag)) return std::nullopt;
    }
    if (mag == 0.0) continue;
    Vec s(n);
    for (int j = 0; j < n; ++j) s(j) = blocks[k](j, j) > 0 ? 1.0 : -1.0;
    if (sign.isZero()) sign = s;
    // The same S up to an overall sign, which goes into the scalar.
    if (s == sign) {
      scalars[k] = mag;
    } else if (s == -sign) {
      scalars[k] = -mag;
    } else {
      return std::nullopt;
    }
  }
  return ScalarShape{scalars[0], scalars[1], scalars[2], scalars[3]};
}

ExtraStrongScalar bound_extra_strong_scalar(const MomentSummary& mom, const SympMatrix& m1, const SympMatrix& m2) {
  check_dims(mom, m1.n(), m2.n());
  const auto shape = scalar_shape(m1, m2);
  if (!shape) throw Error(Errc::ShapeRequired, "blocks are not scalar multiples of one diagonal sign matrix");
  const double n = m1.n();
  const auto [a1, b1, a2, b2] = *shape;
  const double base = n * n / k16Pi2 + sq(mom.cov_abs_total) - sq(mom.cov);
  ExtraStrongScalar r;
  r.rhs = base * sq(a1 * b2 - a2 * b1) + sq(a1 * a2 * mom.dx2 + b1 * b2 * mom.dw2 + (a1 * b2 + a2 * b1) * mom.cov);
  if (a1 * b1 >= 0.0 && a2 * b2 >= 0.0) {
    const double ma1 = std::abs(a1), mb1 = std::abs(b1), ma2 = std::abs(a2), mb2 = std::abs(b2);
    const double d = sq(ma1 * mb2 - ma2 * mb1);
    const double s = ma1 * mb2 + ma2 * mb1;
    r.singular_rhs = base * d + sq(ma1 * ma2 * mom.dx2 + mb1 * mb2 * mom.dw2 + s * mom.cov);
    r.abs_cov_rhs = (n * n / k16Pi2 + sq(mom.cov_abs_total) - sq(mom.cov_abs_diag_sum)) * d +
                    sq(ma1 * ma2 * mom.dx2 + mb1 * mb2 * mom.dw2 - s * mom.cov_abs_diag_sum);
  }
  return r;
}

std::vector<double> hermitian_eigenvalues(const Eigen::MatrixXcd& h, double tol) {
  const Eigen::Index n = h.rows();
  const Eigen::Index m = 2 * n;
  Eigen::MatrixXd a(m, m);
  a.topLeftCorner(n, n) = h.real();
  a.topRightCorner(n, n) = -h.imag();
  a.bottomLeftCorner(n, n) = h.imag();
  a.bottomRightCorner(n, n) = h.real();
  a = (0.5 * (a + a.transpose())).eval();
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < m; ++p) {
      for (Eigen::Index q = p + 1; q < m; ++q) off += a(p, q) * a(p, q);
    }
    if (std::sqrt(off) <= tol * scale) break;
    for (Eigen::Index p = 0; p < m; ++p) {
      for (Eigen::Index q = p + 1; q < m; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < m; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < m; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end());
  // The embedding doubles every eigenvalue; keep one of each pair.
  std::vector<double> out;
  for (std::size_t i = 0; i < ev.size(); i += 2) out.push_back(0.5 * (ev[i] + ev[i + 1]));
  return out;
}

RsCheck robertson_schrodinger_check(const MomentSummary& mom, const SympMatrix& m1, const SympMatrix& m2) {
  check_dims(mom, m1.n(), m2.n());
  const int n = m1.n();
  Mat d(2 * n, 2 * n);
  d.topLeftCorner(n, n) = m1.A();
  d.topRightCorner(n, n) = m1.B();
  d.bottomLeftCorner(n, n) = m2.A();
  d.bottomRightCorner(n, n) = m2.B();
  const Mat ups = d * mom.Sigma * d.transpose();
  const Mat om = d * standard_j(n) * d.transpose();
  Eigen::MatrixXcd h(2 * n, 2 * n);
  for (int i = 0; i < 2 * n; ++i) {
    for (int k = 0; k < 2 * n; ++k) h(i, k) = cd(ups(i, k), om(i, k) / (4.0 * kPi));
  }
  const auto ev = hermitian_eigenvalues(h);
  return {ev.front(), ev.front() >= -1e-8};
}

namespace {

IdentityGap make_gap(cd lhs, cd rhs, double scale) {
  IdentityGap g{lhs, rhs, scale, 0.0, 0.0};
  g.real_gap = std::abs((lhs - rhs).real()) / std::max(scale, 1e-12);
  g.imag_gap = std::abs((lhs - rhs).imag());
  return g;
}

}  // namespace

LemmaCheck lemma_identity_check(const ShearedTransform& t1, const MomentSummary& mom, const FreeSympMatrix& m1,
                                const Mat& a2, const Mat& b2) {
  const int n = m1.n();
  if (t1.gradient.size() != static_cast<std::size_t>(n)) {
    throw Error(Errc::InvalidArgument, "lemma check needs a transform computed with its gradient");
  }
  if (a2.rows() != n || b2.rows() != n) throw Error(Errc::DimensionMismatch, "A2/B2 size differs from N");
  const Mat a1 = m1.A(), b1 = m1.B(), c1 = m1.C(), d1 = m1.D();
  const Mat b3 = b2 * a1.transpose() - a2 * b1.transpose();
  const Mat a3 = a2 * d1.transpose() - b2 * c1.transpose();

  KahanComplex s2;
  KahanSum s3;
  t1.for_each_point([&](std::size_t lin, const double* u) {
    const cd l = t1.values[lin];
    cd acc = 0.0;
    double q = 0.0;
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        acc += u[j] * b3(j, k) * std::conj(t1.gradient[k][lin]);
        q += u[j] * a3(j, k) * u[k];
      }
    }
    s2.add(l * acc);
    s3.add(q * std::norm(l));
  });
  const double vol = t1.cell_volume() / mom.norm2;
  const cd lhs2 = cd(0.0, 1.0) * s2.value() * vol;
  const cd lhs3 = 2.0 * kPi * s3.value() * vol;

  const Mat& x = mom.X;
  const Mat& w = mom.W;
  const Mat ct = mom.CovXW.transpose();
  const Mat bi = m1.b_inverse;
  const auto tr = [](const Mat& m) { return m.trace(); };
  const Mat a1t = a1.transpose(), b1t = b1.transpose(), c1t = c1.transpose(), d1t = d1.transpose();
  const Mat a2t = a2.transpose(), b2t = b2.transpose();

  const double i2 = tr(a1t * b2 + a1t * b2 * c1t * b1 - a1t * a2 * b1t * d1 - a1t * c1 * b2t * b1 + c1t * b1 * a2t * b1);
  const double w2 = 2.0 * kPi * tr((b1t * b2 + b1t * b2 * c1t * b1 - b1t * a2 * b1t * d1) * w);
  const double x2 = 2.0 * kPi *
                    tr((a1t * b2 * bi * a1 + a1t * b2 * c1t * a1 - a1t * a2 * d1t * a1 - bi * a1 * b2t * a1 + a2t * a1) * x);
  const double v2 = 2.0 * kPi *
                    tr((a1t * b2 + a1t * b2 * c1t * b1 - a1t * a2 * b1t * d1 + a1t * c1 * b2t * b1 - c1t * b1 * a2t * b1) * ct);
  const cd rhs2 = cd(0.0, -0.5 * i2) + w2 + x2 + v2;

  const double i3 = tr(a1t * a2 * d1t * b1 - a1t * b2 * c1t * b1 - a2t * b1 - c1t * b1 * a2t * b1 + a1t * c1 * b2t * b1);
  const double x3 = 2.0 * kPi * tr((a1t * a2 * d1t * a1 - a1t * b2 * c1t * a1) * x);
  const double w3 = 2.0 * kPi * tr((b1t * a2 * d1t * b1 - b1t * b2 * c1t * b1) * w);
  const double v3 = 2.0 * kPi *
                    tr((a1t * a2 * d1t * b1 - a1t * b2 * c1t * b1 + a2t * b1 + c1t * b1 * a2t * b1 - a1t * c1 * b2t * b1) * ct);
  const cd rhs3 = cd(0.0, -0.5 * i3) + x3 + w3 + v3;

  return {make_gap(lhs2, rhs2, std::abs(w2) + std::abs(x2) + std::abs(v2)),
          make_gap(lhs3, rhs3, std::abs(x3) + std::abs(w3) + std::abs(v3))};
}

LemmaCheck lemma_identity_check(const SampledSignal& f, const FreeSympMatrix& m1, const Mat& a2, const Mat& b2) {
  const MomentSummary mom = compute_moments(f);
  return lemma_identity_check(fmt_sheared(m1, f, 0, true), mom, m1, a2, b2);
}

bool bound_ordering_check(const MomentSummary& mom, const FreeSympMatrix& m1, const FreeSympMatrix& m2, double tol) {
  return bound_componentwise(mom, m1, m2) >= bound_trace(mom, m1, m2) - tol;
}

bool BoundReport::all_pass() const {
  return error.empty() && std::all_of(entries.begin(), entries.end(), [](const BoundEntry& e) { return e.pass; });
}

BoundEntry make_entry(std::string name, double lhs, double rhs, double rel_tol, bool approximate) {
  BoundEntry e = make_abs_entry(std::move(name), lhs, rhs, rel_tol * std::abs(lhs));
  e.approximate = approximate;
  return e;
}

BoundEntry make_abs_entry(std::string name, double lhs, double rhs, double abs_tol) {
  BoundEntry e;
  e.name = std::move(name);
  e.lhs = lhs;
  e.rhs = rhs;
  e.slack = lhs - rhs;
  e.tolerance = abs_tol;
  e.pass = std::isfinite(e.slack) && e.slack >= -abs_tol;
  return e;
}

nlohmann::json report_to_json(const BoundReport& r) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"name", e.name},
                       {"lhs", e.lhs},
                       {"rhs", e.rhs},
                       {"slack", e.slack},
                       {"tolerance", e.tolerance},
                       {"pass", e.pass},
                       {"approximate", e.approximate}});
  }
  nlohmann::json j = {{"signal_id", r.signal_id}, {"m1_id", r.m1_id}, {"m2_id", r.m2_id}, {"entries", entries}};
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

}  // namespace fmtk
