#include "fmtk/transform.hpp"

#include <algorithm>
#include <cmath>

#include "fmtk/error.hpp"
#include "fmtk/fft.hpp"

namespace fmtk {

namespace {

constexpr double kBandTarget = 1e-10;
constexpr double kBandFallback = 1e-6;
constexpr double kInputBand = 1e-5;
constexpr std::size_t kMaxRefinedPoints = std::size_t{1} << 24;

// e^{2πi t} with t reduced to [0, 1) first; large quadratic phases lose
// nothing to argument reduction this way.
cd unit_phase(double t) {
  t -= std::floor(t);
  return std::polar(1.0, 2.0 * kPi * t);
}

double half_quadratic(const Mat& s, const double* x, int n) {
  double q = 0.0;
  for (int j = 0; j < n; ++j) {
    double r = 0.0;
    for (int k = 0; k < n; ++k) r += s(j, k) * x[k];
    q += x[j] * r;
  }
  return 0.5 * q;
}

void check_grid_match(const FreeSympMatrix& m, const SampledSignal& f) {
  f.grid.validate();
  if (f.grid.dim() != m.n()) throw Error(Errc::DimensionMismatch, "signal dimension differs from matrix N");
  if (f.values.size() != f.grid.size()) throw Error(Errc::DimensionMismatch, "signal length differs from grid size");
}

// Chirped input g on the refined grid together with ĝ = h^N · DFT(g) on its
// conjugate grid.
struct Chirped {
  int s = 1;
  Grid grid;
  CVec g;
  CVec ghat;
};

Chirped chirp_at(const FreeSympMatrix& m, const SampledSignal& f, int s) {
  Chirped c;
  c.s = s;
  c.grid = f.grid.refined(s);
  c.g = upsample(f.values, f.grid.samples, s);
  const Mat sm = m.b_inverse * m.A();
  const int n = m.n();
  if (sm.cwiseAbs().maxCoeff() != 0.0) {
    for_each_point(c.grid, [&](std::size_t lin, const double* x) { c.g[lin] *= unit_phase(half_quadratic(sm, x, n)); });
  }
  c.ghat = c.g;
  centered_dft(c.ghat, c.grid.samples, -1);
  const double cell = c.grid.cell_volume();
  for (auto& v : c.ghat) v *= cell;
  return c;
}

double max_of(const std::vector<double>& v, int* arg) {
  auto it = std::max_element(v.begin(), v.end());
  if (arg != nullptr) *arg = static_cast<int>(it - v.begin());
  return *it;
}

// Largest |(B⁻¹u)_j| over the out box.
std::vector<double> frequency_reach(const FreeSympMatrix& m, const Grid& out) {
  const int n = m.n();
  std::vector<double> reach(n, 0.0);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) reach[j] += std::abs(m.b_inverse(j, k)) * out.half_extent[k];
  }
  return reach;
}

Chirped resolve_chirped(const FreeSympMatrix& m, const SampledSignal& f, const Grid* out, int forced) {
  check_grid_match(m, f);
  const int n = m.n();
  {
    CVec spec = f.values;
    centered_dft(spec, f.grid.samples, -1);
    int axis = 0;
    const double frac = max_of(outer_band_fraction(spec, f.grid.samples), &axis);
    if (frac > kInputBand) {
      throw Error(Errc::NyquistViolated, "input spectrum reaches the Nyquist band on axis " + std::to_string(axis), frac,
                  axis);
    }
  }
  if (forced > 0) return chirp_at(m, f, forced);
  std::vector<double> reach;
  if (out != nullptr) reach = frequency_reach(m, *out);
  const bool chirpless = (m.b_inverse * m.A()).cwiseAbs().maxCoeff() == 0.0;
  std::optional<Chirped> fallback;
  double worst = 0.0;
  int worst_axis = 0;
  for (int s = 1; s <= 16; s *= 2) {
    std::size_t pts = f.grid.size();
    for (int j = 0; j < n; ++j) pts *= static_cast<std::size_t>(s);
    if (pts > kMaxRefinedPoints) break;
    bool covered = true;
    for (int j = 0; j < n && !reach.empty(); ++j) {
      if (reach[j] > s / (2.0 * f.grid.step(j)) * (1.0 + 1e-9)) {
        covered = false;
        worst_axis = j;
      }
    }
    if (!covered) continue;
    Chirped c = chirp_at(m, f, s);
    if (chirpless) return c;
    int axis = 0;
    const double frac = max_of(outer_band_fraction(c.ghat, c.grid.samples), &axis);
    if (frac <= kBandTarget) return c;
    if (frac <= kBandFallback && !fallback) fallback = std::move(c);
    worst = frac;
    worst_axis = axis;
  }
  if (fallback) return std::move(*fallback);
  throw Error(Errc::NyquistViolated,
              "chirped input or requested output band not resolvable on axis " + std::to_string(worst_axis), worst,
              worst_axis);
}

// Effective half-width along each axis: smallest X with mass(|x_j| > X) ≤ tail.
std::vector<double> effective_half_width(const CVec& values, const Grid& g, double tail) {
  const int nd = g.dim();
  std::vector<double> out(nd);
  for (int a = 0; a < nd; ++a) {
    std::size_t stride = 1;
    for (int b = a + 1; b < nd; ++b) stride *= static_cast<std::size_t>(g.samples[b]);
    const int n = g.samples[a];
    std::vector<double> marg(n, 0.0);
    double total = 0.0;
    for (std::size_t lin = 0; lin < values.size(); ++lin) {
      const double p = std::norm(values[lin]);
      marg[(lin / stride) % static_cast<std::size_t>(n)] += p;
      total += p;
    }
    double outside = 0.0;
    int lo = 0, hi = n - 1;
    // Peel the outermost sample while the peeled mass stays under the budget.
    while (lo < hi) {
      const bool take_lo = std::abs(g.coord(a, lo)) >= std::abs(g.coord(a, hi));
      const double next = take_lo ? marg[lo] : marg[hi];
      if (outside + next > tail * total) break;
      outside += next;
      take_lo ? ++lo : --hi;
    }
    out[a] = std::max(std::abs(g.coord(a, lo)), std::abs(g.coord(a, hi))) + g.step(a);
  }
  return out;
}

}  // namespace

cd fmt_phase_constant(const FreeSympMatrix& m) {
  cd c = std::polar(1.0 / std::sqrt(m.abs_det_b), -kPi * m.n() / 4.0);
  if (m.det_b < 0.0) c *= cd(0.0, -1.0);
  return c;
}

std::vector<double> outer_band_fraction(const CVec& spectrum, const std::vector<int>& dims) {
  const int nd = static_cast<int>(dims.size());
  std::vector<double> outer(nd, 0.0);
  double total = 0.0;
  std::vector<int> idx(nd, 0);
  for (std::size_t lin = 0; lin < spectrum.size(); ++lin) {
    const double p = std::norm(spectrum[lin]);
    total += p;
    for (int a = 0; a < nd; ++a) {
      if (std::abs(idx[a] - dims[a] / 2) >= 0.45 * dims[a]) outer[a] += p;
    }
    for (int a = nd - 1; a >= 0; --a) {
      if (++idx[a] < dims[a]) break;
      idx[a] = 0;
    }
  }
  if (total > 0.0) {
    for (auto& o : outer) o /= total;
  }
  return outer;
}

int required_oversample(const FreeSympMatrix& m, const SampledSignal& f, const Grid* out_grid) {
  return resolve_chirped(m, f, out_grid, 0).s;
}

Grid fast_out_grid(const FreeSympMatrix& m, const Grid& in_grid, int oversample) {
  Grid g = in_grid.refined(oversample);
  for (int j = 0; j < g.dim(); ++j) {
    g.half_extent[j] = std::abs(m.B()(j, j)) * oversample / (2.0 * in_grid.step(j));
  }
  return g;
}

Grid default_out_grid(const FreeSympMatrix& m, const SampledSignal& f) {
  check_grid_match(m, f);
  const int n = m.n();
  constexpr double kTail = 1e-14;
  const auto xw = effective_half_width(f.values, f.grid, kTail);
  CVec spec = f.values;
  centered_dft(spec, f.grid.samples, -1);
  const auto ww = effective_half_width(spec, f.grid.conjugate(), kTail);
  Grid out{std::vector<int>(n), std::vector<double>(n)};
  std::size_t total = 1;
  for (int j = 0; j < n; ++j) {
    double ext = 0.0, band = 0.0;
    for (int k = 0; k < n; ++k) {
      ext += std::abs(m.A()(j, k)) * xw[k] + std::abs(m.B()(j, k)) * ww[k];
      band += std::abs(m.C()(j, k)) * xw[k] + std::abs(m.D()(j, k)) * ww[k];
    }
    const double step = 1.0 / (2.2 * band);
    const int half_count = std::max(4, static_cast<int>(std::ceil(ext / step)));
    out.samples[j] = 2 * half_count;
    out.half_extent[j] = half_count * step;
    total *= static_cast<std::size_t>(out.samples[j]);
  }
  if (total > (std::size_t{1} << 22)) {
    throw Error(Errc::TooLarge, "default output grid would need " + std::to_string(total) + " points; pass out_grid",
                static_cast<double>(total));
  }
  return out;
}

FmtPlan make_plan(const FreeSympMatrix& m, const SampledSignal& f, std::optional<Grid> out_grid) {
  check_grid_match(m, f);
  FmtPlan plan{m, f.grid, Grid{}, FmtPath::direct_dft, 1, fmt_phase_constant(m)};
  if (!out_grid && is_diagonal(m.B())) {
    plan.path = FmtPath::fast_diagonal_b;
    plan.oversample = required_oversample(m, f, nullptr);
    plan.out_grid = fast_out_grid(m, f.grid, plan.oversample);
    return plan;
  }
  plan.out_grid = out_grid ? *out_grid : default_out_grid(m, f);
  plan.out_grid.validate();
  if (plan.out_grid.dim() != m.n()) throw Error(Errc::DimensionMismatch, "out_grid dimension differs from matrix N");
  plan.oversample = required_oversample(m, f, &plan.out_grid);
  return plan;
}

ShearedTransform fmt_sheared(const FreeSympMatrix& m, const SampledSignal& f, int oversample, bool with_gradient) {
  Chirped ch = resolve_chirped(m, f, nullptr, oversample);
  const int n = m.n();
  ShearedTransform t;
  t.b = m.B();
  t.abs_det_b = m.abs_det_b;
  t.w_grid = ch.grid.conjugate();
  t.oversample = ch.s;
  const cd c = fmt_phase_constant(m);
  const Mat btd = m.B().transpose() * m.D();
  const Mat d = m.D();
  std::vector<cd> out_chirp(ch.ghat.size());
  for_each_point(t.w_grid, [&](std::size_t lin, const double* w) { out_chirp[lin] = c * unit_phase(half_quadratic(btd, w, n)); });
  t.values.resize(ch.ghat.size());
  for (std::size_t i = 0; i < t.values.size(); ++i) t.values[i] = out_chirp[i] * ch.ghat[i];
  if (!with_gradient) return t;

  // ∇_u L = c·e^{πi uᵀDB⁻¹u}[2πi DB⁻¹u·ĝ(w) + B⁻ᵀ∇ĝ(w)], where DB⁻¹u = Dw and
  // ∇ĝ is the transform of −2πi x g.
  std::vector<CVec> dg(n);
  const double cell = ch.grid.cell_volume();
  for (int k = 0; k < n; ++k) {
    dg[k].resize(ch.g.size());
    for_each_point(ch.grid, [&](std::size_t lin, const double* x) { dg[k][lin] = cd(0.0, -2.0 * kPi * x[k]) * ch.g[lin]; });
    centered_dft(dg[k], ch.grid.samples, -1);
    for (auto& v : dg[k]) v *= cell;
  }
  const Mat bit = m.b_inverse.transpose();
  t.gradient.assign(n, CVec(t.values.size()));
  for_each_point(t.w_grid, [&](std::size_t lin, const double* w) {
    for (int j = 0; j < n; ++j) {
      double dw = 0.0;
      for (int k = 0; k < n; ++k) dw += d(j, k) * w[k];
      cd acc = cd(0.0, 2.0 * kPi * dw) * ch.ghat[lin];
      for (int k = 0; k < n; ++k) acc += bit(j, k) * dg[k][lin];
      t.gradient[j][lin] = out_chirp[lin] * acc;
    }
  });
  return t;
}

double sheared_l2_norm(const ShearedTransform& t) {
  KahanSum s;
  for (const auto& v : t.values) s.add(std::norm(v));
  return std::sqrt(s.value() * t.cell_volume());
}

double sheared_second_moment(const ShearedTransform& t) {
  KahanSum s;
  const int n = t.dim();
  t.for_each_point([&](std::size_t lin, const double* u) {
    double r2 = 0.0;
    for (int j = 0; j < n; ++j) r2 += u[j] * u[j];
    s.add(r2 * std::norm(t.values[lin]));
  });
  return s.value() * t.cell_volume();
}

double sheared_weighted_lp(const ShearedTransform& t, double p) {
  std::vector<double> a(t.values.size());
  const int n = t.dim();
  t.for_each_point([&](std::size_t lin, const double* u) {
    double r2 = 0.0;
    for (int j = 0; j < n; ++j) r2 += u[j] * u[j];
    a[lin] = std::sqrt(r2) * std::abs(t.values[lin]);
  });
  return lp_quadrature(a, t.cell_volume(), p);
}

SampledSignal fmt_apply(const FmtPlan& plan, const SampledSignal& f) {
  if (!(f.grid == plan.in_grid)) throw Error(Errc::DimensionMismatch, "signal grid differs from plan in_grid");
  const FreeSympMatrix& m = plan.matrix;
  const int n = m.n();
  SampledSignal out{plan.out_grid, CVec(plan.out_grid.size())};

  if (plan.path == FmtPath::fast_diagonal_b) {
    const ShearedTransform t = fmt_sheared(m, f, plan.oversample);
    // u_j = b_j w_j; a negative b_j reverses the axis, index i ↦ (S − i) mod S.
    std::vector<std::vector<std::size_t>> axis_map(n);
    for (int j = 0; j < n; ++j) {
      const int s = plan.out_grid.samples[j];
      axis_map[j].resize(s);
      for (int i = 0; i < s; ++i) axis_map[j][i] = static_cast<std::size_t>(m.B()(j, j) > 0.0 ? i : (s - i) % s);
    }
    std::vector<int> idx(n, 0);
    for (std::size_t lin = 0; lin < out.values.size(); ++lin) {
      std::size_t src = 0;
      for (int j = 0; j < n; ++j) src = src * plan.out_grid.samples[j] + axis_map[j][idx[j]];
      out.values[lin] = t.values[src];
      for (int j = n - 1; j >= 0; --j) {
        if (++idx[j] < plan.out_grid.samples[j]) break;
        idx[j] = 0;
      }
    }
    return out;
  }

  const Chirped ch = resolve_chirped(m, f, &plan.out_grid, plan.oversample);
  const Mat dbi = m.D() * m.b_inverse;
  const double cell = ch.grid.cell_volume();
  std::vector<std::vector<double>> xs(n);
  for (int j = 0; j < n; ++j) xs[j] = ch.grid.axis_coords(j);
  const std::size_t inner = static_cast<std::size_t>(ch.grid.samples[n - 1]);
  std::vector<std::vector<cd>> e(n);
  CVec buf(ch.g.size() / inner);
  std::vector<double> w(n);
  for_each_point(plan.out_grid, [&](std::size_t lin, const double* u) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += m.b_inverse(j, k) * u[k];
      w[j] = s;
      e[j].resize(xs[j].size());
      for (std::size_t i = 0; i < xs[j].size(); ++i) e[j][i] = unit_phase(-w[j] * xs[j][i]);
    }
    // Contract the last axis into buf, then the remaining axes in place.
    std::size_t len = buf.size();
    for (std::size_t o = 0; o < len; ++o) {
      cd acc = 0.0;
      const cd* row = ch.g.data() + o * inner;
      for (std::size_t i = 0; i < inner; ++i) acc += row[i] * e[n - 1][i];
      buf[o] = acc;
    }
    for (int j = n - 2; j >= 0; --j) {
      const std::size_t nj = xs[j].size();
      len /= nj;
      for (std::size_t o = 0; o < len; ++o) {
        cd acc = 0.0;
        for (std::size_t i = 0; i < nj; ++i) acc += buf[o * nj + i] * e[j][i];
        buf[o] = acc;
      }
    }
    out.values[lin] = plan.phase_constant * unit_phase(half_quadratic(dbi, u, n)) * buf[0] * cell;
  });
  return out;
}

SampledSignal fmt_apply(const FreeSympMatrix& m, const SampledSignal& f, std::optional<Grid> out_grid) {
  return fmt_apply(make_plan(m, f, std::move(out_grid)), f);
}

SampledSignal fmt_direct(const FreeSympMatrix& m, const SampledSignal& f, const Grid& out_grid) {
  check_grid_match(m, f);
  out_grid.validate();
  if (out_grid.dim() != m.n()) throw Error(Errc::DimensionMismatch, "out_grid dimension differs from matrix N");
  const int s = required_oversample(m, f, &out_grid);
  const Grid fine = f.grid.refined(s);
  const double pairs = static_cast<double>(fine.size()) * static_cast<double>(out_grid.size());
  if (pairs > static_cast<double>(std::size_t{1} << 27)) {
    throw Error(Errc::TooLarge, "direct evaluation needs " + std::to_string(pairs) + " pairs", pairs);
  }
  const int n = m.n();
  const CVec fu = upsample(f.values, f.grid.samples, s);
  const Mat sa = m.b_inverse * m.A();
  const Mat dbi = m.D() * m.b_inverse;
  std::vector<double> qx(fine.size());
  std::vector<double> xs(fine.size() * n);
  for_each_point(fine, [&](std::size_t lin, const double* x) {
    qx[lin] = half_quadratic(sa, x, n);
    for (int j = 0; j < n; ++j) xs[lin * n + j] = x[j];
  });
  const double cell = fine.cell_volume();
  const cd c = fmt_phase_constant(m);
  SampledSignal out{out_grid, CVec(out_grid.size())};
  std::vector<double> w(n);
  for_each_point(out_grid, [&](std::size_t lin, const double* u) {
    // Kernel phase/2π = ½uᵀDB⁻¹u − uᵀB⁻ᵀx + ½xᵀB⁻¹Ax.
    const double qu = half_quadratic(dbi, u, n);
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += m.b_inverse(j, k) * u[k];
      w[j] = acc;
    }
    KahanComplex sum;
    for (std::size_t i = 0; i < fine.size(); ++i) {
      double cross = 0.0;
      for (int j = 0; j < n; ++j) cross += w[j] * xs[i * n + j];
      sum.add(fu[i] * unit_phase(qu - cross + qx[i]));
    }
    out.values[lin] = c * sum.value() * cell;
  });
  return out;
}

double relative_l2_distance(const CVec& a, const CVec& b, bool up_to_phase) {
  if (a.size() != b.size()) throw Error(Errc::DimensionMismatch, "relative_l2_distance: sizes differ");
  KahanComplex inner;
  KahanSum nb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    inner.add(std::conj(b[i]) * a[i]);
    nb.add(std::norm(b[i]));
  }
  const cd rot = up_to_phase && std::abs(inner.value()) > 0.0 ? inner.value() / std::abs(inner.value()) : cd(1.0, 0.0);
  KahanSum diff;
  for (std::size_t i = 0; i < a.size(); ++i) diff.add(std::norm(a[i] - rot * b[i]));
  return std::sqrt(diff.value() / nb.value());
}

Grid wigner_w_grid(const Grid& x_grid) {
  Grid g = x_grid.refined(2);
  for (int j = 0; j < g.dim(); ++j) g.half_extent[j] = 1.0 / (2.0 * x_grid.step(j));
  return g;
}

namespace {

// Runs fn(x_lin, x, row) for every x, where row holds W(x, ·) on w_grid
// (complex; the imaginary part is rounding residue).
template <class Fn>
void wigner_rows(const SampledSignal& f, const Grid& w_grid, Fn&& fn) {
  const Grid& g = f.grid;
  g.validate();
  const int nd = g.dim();
  if (w_grid.dim() != nd) throw Error(Errc::DimensionMismatch, "w_grid dimension differs from signal");
  for (int j = 0; j < nd; ++j) {
    const double want = 1.0 / (2.0 * g.step(j));
    if (w_grid.samples[j] < 2 * g.samples[j] || w_grid.samples[j] % 2 != 0 ||
        std::abs(w_grid.half_extent[j] - want) > 1e-12 * want) {
      throw Error(Errc::InvalidArgument, "w_grid must have half-extent 1/(2h) and >= 2n samples", 0.0, j);
    }
  }
  std::vector<int> fine(nd);
  for (int j = 0; j < nd; ++j) fine[j] = 2 * g.samples[j];
  const CVec fu = upsample(f.values, g.samples, 2);
  const std::vector<int>& kd = w_grid.samples;
  const double cell = g.cell_volume();
  CVec row(w_grid.size());
  std::vector<int> xi(nd), mi(nd);
  for_each_point(g, [&](std::size_t xlin, const double* x) {
    std::size_t rem = xlin;
    for (int j = nd - 1; j >= 0; --j) {
      xi[j] = static_cast<int>(rem % static_cast<std::size_t>(g.samples[j]));
      rem /= static_cast<std::size_t>(g.samples[j]);
    }
    std::fill(mi.begin(), mi.end(), 0);
    for (std::size_t mlin = 0; mlin < row.size(); ++mlin) {
      bool ok = true;
      std::size_t ia = 0, ib = 0;
      for (int j = 0; j < nd && ok; ++j) {
        const int m = mi[j] - kd[j] / 2;
        const int a = 2 * xi[j] + m;
        const int b = 2 * xi[j] - m;
        // The lone m = −K/2 term has no partner at +K/2; dropping it keeps W real.
        ok = m != -kd[j] / 2 && a >= 0 && b >= 0 && a < fine[j] && b < fine[j];
        ia = ia * fine[j] + static_cast<std::size_t>(std::max(a, 0));
        ib = ib * fine[j] + static_cast<std::size_t>(std::max(b, 0));
      }
      row[mlin] = ok ? fu[ia] * std::conj(fu[ib]) : cd(0.0, 0.0);
      for (int j = nd - 1; j >= 0; --j) {
        if (++mi[j] < kd[j]) break;
        mi[j] = 0;
      }
    }
    centered_dft(row, kd, -1);
    for (auto& v : row) v *= cell;
    fn(xlin, x, row);
  });
}

}  // namespace

WignerTable wigner(const SampledSignal& f, const Grid& w_grid) {
  const double total = static_cast<double>(f.grid.size()) * static_cast<double>(w_grid.size());
  if (total > static_cast<double>(std::size_t{1} << 25)) {
    throw Error(Errc::TooLarge, "Wigner table would hold " + std::to_string(total) + " values", total);
  }
  WignerTable t{f.grid, w_grid, std::vector<double>(static_cast<std::size_t>(total)), 0.0};
  const std::size_t k = w_grid.size();
  wigner_rows(f, w_grid, [&](std::size_t xlin, const double*, const CVec& row) {
    for (std::size_t l = 0; l < k; ++l) {
      t.values[xlin * k + l] = row[l].real();
      t.max_imag = std::max(t.max_imag, std::abs(row[l].imag()));
    }
  });
  return t;
}

WignerMoments wigner_moments(const SampledSignal& f) {
  const Grid wg = wigner_w_grid(f.grid);
  const int nd = f.grid.dim();
  const double work = static_cast<double>(f.grid.size()) * static_cast<double>(wg.size());
  if (work > static_cast<double>(std::size_t{1} << 31)) {
    throw Error(Errc::TooLarge, "Wigner reduction over " + std::to_string(work) + " points", work);
  }
  std::vector<double> wpts(wg.size() * nd);
  for_each_point(wg, [&](std::size_t lin, const double* w) {
    for (int j = 0; j < nd; ++j) wpts[lin * nd + j] = w[j];
  });
  const double dx = f.grid.cell_volume();
  const double dw = wg.cell_volume();
  WignerMoments r;
  r.x_marginal.assign(f.grid.size(), 0.0);
  r.w_marginal.assign(wg.size(), 0.0);
  const int z = 2 * nd;
  std::vector<KahanSum> s1(z), s2(static_cast<std::size_t>(z * z));
  KahanSum mass;
  std::vector<double> m1(nd), m2(static_cast<std::size_t>(nd * nd));
  wigner_rows(f, wg, [&](std::size_t xlin, const double* x, const CVec& row) {
    double m0 = 0.0;
    std::fill(m1.begin(), m1.end(), 0.0);
    std::fill(m2.begin(), m2.end(), 0.0);
    for (std::size_t l = 0; l < row.size(); ++l) {
      const double v = row[l].real();
      r.max_imag = std::max(r.max_imag, std::abs(row[l].imag()));
      r.w_marginal[l] += v * dx;
      m0 += v;
      const double* w = &wpts[l * nd];
      for (int j = 0; j < nd; ++j) {
        m1[j] += v * w[j];
        for (int k = 0; k < nd; ++k) m2[j * nd + k] += v * w[j] * w[k];
      }
    }
    r.x_marginal[xlin] = m0 * dw;
    const double c = dx * dw;
    mass.add(m0 * c);
    for (int j = 0; j < nd; ++j) {
      s1[j].add(x[j] * m0 * c);
      s1[nd + j].add(m1[j] * c);
      for (int k = 0; k < nd; ++k) {
        s2[j * z + k].add(x[j] * x[k] * m0 * c);
        s2[j * z + nd + k].add(x[j] * m1[k] * c);
        s2[(nd + j) * z + nd + k].add(m2[j * nd + k] * c);
      }
    }
  });
  r.mass = mass.value();
  r.mean = Vec(z);
  for (int a = 0; a < z; ++a) r.mean(a) = s1[a].value() / r.mass;
  r.sigma = Mat(z, z);
  for (int a = 0; a < z; ++a) {
    for (int b = a; b < z; ++b) {
      r.sigma(a, b) = s2[a * z + b].value() / r.mass - r.mean(a) * r.mean(b);
      r.sigma(b, a) = r.sigma(a, b);
    }
  }
  return r;
}

}  // namespace fmtk
