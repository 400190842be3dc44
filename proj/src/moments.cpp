#include "fmtk/moments.hpp"

#include <cmath>

#include "fmtk/error.hpp"
#include "fmtk/fft.hpp"
#include "fmtk/transform.hpp"

namespace fmtk {

namespace {

FreeSympMatrix fourier_matrix(int n) { return make_free(table1_matrix(Table1Kind::fourier, {}, n)); }

nlohmann::json mat_json(const Mat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

void finish_summary(MomentSummary& m) {
  const int n = static_cast<int>(m.X.rows());
  m.dx2 = m.X.trace();
  m.dw2 = m.W.trace();
  m.cov = m.CovXW.trace();
  m.cov_abs_diag_sum = m.CovXW.diagonal().cwiseAbs().sum();
  m.Sigma = Mat(2 * n, 2 * n);
  m.Sigma.topLeftCorner(n, n) = m.X;
  m.Sigma.topRightCorner(n, n) = m.CovXW;
  m.Sigma.bottomLeftCorner(n, n) = m.CovXW.transpose();
  m.Sigma.bottomRightCorner(n, n) = m.W;
}

MomentSummary compute_moments(const SampledSignal& f, const PolarField& polar, const MomentOptions& opt) {
  const Grid& g = f.grid;
  const int n = g.dim();
  const double hx = g.cell_volume();
  MomentSummary m;

  KahanSum mass;
  std::vector<KahanSum> sx(n);
  for_each_point(g, [&](std::size_t lin, const double* x) {
    const double p = std::norm(f.values[lin]);
    mass.add(p);
    for (int j = 0; j < n; ++j) sx[j].add(x[j] * p);
  });
  const double total = mass.value();
  if (!(total > 0.0)) throw Error(Errc::ZeroSignal, "compute_moments on a zero signal");
  m.norm2 = total * hx;
  m.mean_x = Vec(n);
  for (int j = 0; j < n; ++j) m.mean_x(j) = sx[j].value() / total;

  // Frequency side from |L_J f| = |f̂| on the conjugate grid.
  const SampledSignal fh = fmt_apply(fourier_matrix(n), f);
  KahanSum wmass;
  std::vector<KahanSum> sw(n);
  for_each_point(fh.grid, [&](std::size_t lin, const double* w) {
    const double p = std::norm(fh.values[lin]);
    wmass.add(p);
    for (int j = 0; j < n; ++j) sw[j].add(w[j] * p);
  });
  const double wtotal = wmass.value();
  m.mean_w = Vec(n);
  for (int j = 0; j < n; ++j) m.mean_w(j) = sw[j].value() / wtotal;

  if (opt.require_centered) {
    const double off = std::max(m.mean_x.cwiseAbs().maxCoeff(), m.mean_w.cwiseAbs().maxCoeff());
    if (off > opt.center_tol) {
      throw Error(Errc::NotCentered, "means reach " + std::to_string(off) + "; recenter first", off);
    }
  }

  std::vector<KahanSum> xx(n * n), ww(n * n), xp(n * n), xpa(n * n);
  KahanSum cov_abs;
  for_each_point(g, [&](std::size_t lin, const double* x) {
    const double p = std::norm(f.values[lin]);
    double r2 = 0.0, g2 = 0.0;
    for (int j = 0; j < n; ++j) {
      const double dj = x[j] - m.mean_x(j);
      r2 += dj * dj;
      for (int k = 0; k < n; ++k) xx[j * n + k].add(dj * (x[k] - m.mean_x(k)) * p);
    }
    if (!polar.mask[lin]) return;
    for (int j = 0; j < n; ++j) {
      const double dj = x[j] - m.mean_x(j);
      for (int k = 0; k < n; ++k) {
        const double gk = polar.phase_gradient[k][lin] - m.mean_w(k);
        xp[j * n + k].add(dj * gk * p);
        xpa[j * n + k].add(std::abs(dj) * std::abs(gk) * p);
      }
    }
    for (int k = 0; k < n; ++k) {
      const double gk = polar.phase_gradient[k][lin] - m.mean_w(k);
      g2 += gk * gk;
    }
    cov_abs.add(std::sqrt(r2) * std::sqrt(g2) * p);
  });
  for_each_point(fh.grid, [&](std::size_t lin, const double* w) {
    const double p = std::norm(fh.values[lin]);
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) ww[j * n + k].add((w[j] - m.mean_w(j)) * (w[k] - m.mean_w(k)) * p);
    }
  });

  m.X = Mat(n, n);
  m.W = Mat(n, n);
  m.CovXW = Mat(n, n);
  m.cov_abs_per_pair = Mat(n, n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      m.X(j, k) = xx[j * n + k].value() / total;
      m.W(j, k) = ww[j * n + k].value() / wtotal;
      m.CovXW(j, k) = xp[j * n + k].value() / total;
      m.cov_abs_per_pair(j, k) = xpa[j * n + k].value() / total;
    }
  }
  m.X = (0.5 * (m.X + m.X.transpose())).eval();
  m.W = (0.5 * (m.W + m.W.transpose())).eval();
  m.cov_abs_total = cov_abs.value() / total;
  m.masked_mass = polar.masked_mass;
  m.approximate = polar.masked_mass > 1e-8;

  // W again from the x side: ∫w_j w_k|f̂|² = (1/4π²)∫Re(∂_j f ∂_k f̄).
  const auto grad = opt.scheme == DerivativeScheme::spectral ? spectral_gradient(f) : gradient(f);
  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      KahanSum s;
      for (std::size_t i = 0; i < f.values.size(); ++i) s.add(std::real(grad[j][i] * std::conj(grad[k][i])));
      const double wg = s.value() / (4.0 * kPi * kPi * total) - m.mean_w(j) * m.mean_w(k);
      worst = std::max(worst, std::abs(wg - m.W(j, k)));
    }
  }
  m.w_crosscheck = worst;
  finish_summary(m);
  return m;
}

MomentSummary compute_moments(const SampledSignal& f, const MomentOptions& opt) {
  return compute_moments(f, polar_decompose(f, opt.floor_rel, opt.scheme), opt);
}

MomentSummary analytic_gaussian_moments(const GaussianChirp& g) {
  g.validate();
  const int n = g.dim();
  const double ie = g.inv_epsilon();
  MomentSummary m;
  m.mean_x = Vec::Zero(n);
  m.mean_w = Vec::Zero(n);
  m.X = Mat::Zero(n, n);
  m.W = Mat::Zero(n, n);
  m.CovXW = Mat::Zero(n, n);
  m.cov_abs_per_pair = Mat::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    const double z = g.zeta[j];
    m.X(j, j) = z / 2.0;
    m.W(j, j) = 1.0 / (8.0 * kPi * kPi * z) + z * ie * ie / 2.0;
    m.CovXW(j, j) = z * ie / 2.0;
    for (int k = 0; k < n; ++k) {
      // x_j ~ N(0, ζ_j/2) independently and ∂_kφ = x_k/ε, so the off-diagonal
      // entries are E|x_j|·E|x_k|/|ε| with E|x_j| = √(ζ_j/π).
      m.cov_abs_per_pair(j, k) = j == k ? z * std::abs(ie) / 2.0 : std::sqrt(z * g.zeta[k]) * std::abs(ie) / kPi;
    }
  }
  finish_summary(m);
  // |∇φ| = |x|/|ε|, hence COV = Δx²/|ε|.
  m.cov_abs_total = m.dx2 * std::abs(ie);
  return m;
}

double moment_identity(const MomentSummary& mom, const Mat& a, const Mat& b) {
  return (a.transpose() * a * mom.X).trace() + (b.transpose() * b * mom.W).trace() +
         2.0 * (a.transpose() * b * mom.CovXW.transpose()).trace();
}

SecondMoment second_moment_fmt(const SampledSignal& f, const FreeSympMatrix& m, const MomentSummary& mom) {
  const ShearedTransform t = fmt_sheared(m, f);
  return {sheared_second_moment(t) / mom.norm2, moment_identity(mom, m.A(), m.B())};
}

SecondMoment second_moment_fmt(const SampledSignal& f, const FreeSympMatrix& m) {
  return second_moment_fmt(f, m, compute_moments(f));
}

Mat sigma_via_wigner(const SampledSignal& f) { return wigner_moments(f).sigma; }

Recentered recenter(const SampledSignal& f) {
  MomentOptions opt;
  opt.require_centered = false;
  const Grid& g = f.grid;
  const int n = g.dim();
  // Means only; the full summary is cheap enough and reuses the same quadrature.
  const MomentSummary m = compute_moments(f, opt);
  Recentered r{f, m.mean_x, m.mean_w};

  CVec spec = f.values;
  centered_dft(spec, g.samples, -1);
  const Grid wg = g.conjugate();
  for_each_point(wg, [&](std::size_t lin, const double* w) {
    double t = 0.0;
    for (int j = 0; j < n; ++j) t += w[j] * m.mean_x(j);
    t -= std::floor(t);
    spec[lin] *= std::polar(1.0, 2.0 * kPi * t);
  });
  centered_dft(spec, g.samples, +1);
  const double scale = 1.0 / static_cast<double>(g.size());
  for_each_point(g, [&](std::size_t lin, const double* x) {
    double t = 0.0;
    for (int j = 0; j < n; ++j) t -= x[j] * m.mean_w(j);
    t -= std::floor(t);
    r.signal.values[lin] = spec[lin] * scale * std::polar(1.0, 2.0 * kPi * t);
  });
  return r;
}

nlohmann::json moments_to_json(const MomentSummary& m) {
  return {{"mean_x", std::vector<double>(m.mean_x.data(), m.mean_x.data() + m.mean_x.size())},
          {"mean_w", std::vector<double>(m.mean_w.data(), m.mean_w.data() + m.mean_w.size())},
          {"dx2", m.dx2},
          {"dw2", m.dw2},
          {"cov", m.cov},
          {"cov_abs_total", m.cov_abs_total},
          {"cov_abs_diag_sum", m.cov_abs_diag_sum},
          {"cov_abs_per_pair", mat_json(m.cov_abs_per_pair)},
          {"X", mat_json(m.X)},
          {"W", mat_json(m.W)},
          {"CovXW", mat_json(m.CovXW)},
          {"Sigma", mat_json(m.Sigma)},
          {"norm2", m.norm2},
          {"masked_mass", m.masked_mass},
          {"approximate", m.approximate},
          {"w_crosscheck", m.w_crosscheck}};
}

}  // namespace fmtk
