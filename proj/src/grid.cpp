#include "fmtk/grid.hpp"

#include <algorithm>
#include <cmath>

#include "fmtk/error.hpp"
#include "fmtk/fft.hpp"

namespace fmtk {

std::size_t Grid::size() const {
  std::size_t total = 1;
  for (int s : samples) total *= static_cast<std::size_t>(s);
  return total;
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim(); ++a) v *= step(a);
  return v;
}

std::vector<double> Grid::axis_coords(int axis) const {
  std::vector<double> c(samples[axis]);
  for (int i = 0; i < samples[axis]; ++i) c[i] = coord(axis, i);
  return c;
}

Grid Grid::conjugate() const {
  Grid g = *this;
  for (int a = 0; a < dim(); ++a) g.half_extent[a] = 1.0 / (2.0 * step(a));
  return g;
}

Grid Grid::refined(int factor) const {
  Grid g = *this;
  for (auto& s : g.samples) s *= factor;
  return g;
}

void Grid::validate() const {
  if (samples.empty() || samples.size() != half_extent.size()) {
    throw Error(Errc::InvalidArgument, "grid needs matching, non-empty samples and half_extent");
  }
  for (int a = 0; a < dim(); ++a) {
    if (samples[a] < 8 || samples[a] % 2 != 0) {
      throw Error(Errc::InvalidArgument, "axis " + std::to_string(a) + ": samples must be even and >= 8", samples[a], a);
    }
    if (!(half_extent[a] > 0.0) || !std::isfinite(half_extent[a])) {
      throw Error(Errc::InvalidArgument, "axis " + std::to_string(a) + ": half_extent must be positive", half_extent[a], a);
    }
  }
}

Grid uniform_grid(int n, int samples, double half_extent) {
  Grid g{std::vector<int>(n, samples), std::vector<double>(n, half_extent)};
  g.validate();
  return g;
}

double GaussianChirp::inv_epsilon() const { return std::isinf(epsilon) ? 0.0 : 1.0 / epsilon; }

void GaussianChirp::validate() const {
  if (zeta.empty()) throw Error(Errc::DegenerateParameter, "zeta is empty");
  for (double z : zeta) {
    if (!(z > 0.0) || !std::isfinite(z)) throw Error(Errc::DegenerateParameter, "zeta entries must be positive", z);
  }
  if (epsilon == 0.0 || std::isnan(epsilon)) throw Error(Errc::DegenerateParameter, "epsilon must be nonzero");
  if (!std::isfinite(beta)) throw Error(Errc::DegenerateParameter, "beta must be finite");
}

double gaussian_tail_mass(const GaussianChirp& g, const Grid& grid) {
  // |f|² factorizes into 1-D densities ∝ exp(−x²/ζ); the mass beyond L is erfc(L/√ζ).
  double tail = 0.0;
  for (int a = 0; a < g.dim(); ++a) tail += std::erfc(grid.half_extent[a] / std::sqrt(g.zeta[a]));
  return tail;
}

SampledSignal sample_gaussian_chirp(const GaussianChirp& g, const Grid& grid) {
  g.validate();
  grid.validate();
  if (grid.dim() != g.dim()) throw Error(Errc::DimensionMismatch, "grid and zeta lengths differ");
  const double tail = gaussian_tail_mass(g, grid);
  if (tail > 1e-8) throw Error(Errc::GridTooSmall, "tail mass outside box is " + std::to_string(tail), tail);
  const int n = g.dim();
  double prod = 1.0;
  for (double z : g.zeta) prod *= z;
  const double amp = std::pow(kPi, -0.25 * n) * std::pow(prod, -0.25);
  const double ie = g.inv_epsilon();
  SampledSignal f{grid, CVec(grid.size())};
  for_each_point(grid, [&](std::size_t lin, const double* x) {
    double env = 0.0, r2 = 0.0;
    for (int a = 0; a < n; ++a) {
      env += x[a] * x[a] / (2.0 * g.zeta[a]);
      r2 += x[a] * x[a];
    }
    // Reduce the phase modulo 1 before scaling by 2π to keep large-|x| chirps accurate.
    double ph = r2 * ie / 2.0 + g.beta;
    ph -= std::floor(ph);
    f.values[lin] = std::polar(amp * std::exp(-env), 2.0 * kPi * ph);
  });
  return f;
}

Grid default_grid(const GaussianChirp& g, int samples) {
  g.validate();
  const int nd = g.dim();
  const bool fixed = samples > 0;
  int n = fixed ? samples : (nd <= 2 ? 128 : 48);
  const double ie = g.inv_epsilon();
  std::vector<double> sx(nd), sw(nd);
  for (int a = 0; a < nd; ++a) {
    sx[a] = std::sqrt(g.zeta[a] / 2.0);
    sw[a] = std::sqrt(1.0 / (8.0 * kPi * kPi * g.zeta[a]) + g.zeta[a] * ie * ie / 2.0);
  }
  constexpr double kSpace = 7.0;  // standard deviations kept in x; 5.9 left ~1e-6 Cov error from the wrap
  constexpr double kBand = 5.3;   // standard deviations kept below Nyquist
  for (;;) {
    Grid grid{std::vector<int>(nd, n), std::vector<double>(nd)};
    bool ok = true;
    for (int a = 0; a < nd; ++a) {
      // Balanced cut: L = c·σx gives Nyquist n/(4L) = c·σw. Beyond that, widen
      // toward kSpace·σx only as far as the band margin allows.
      const double c = std::sqrt(n / (4.0 * sx[a] * sw[a]));
      const double band_limit = n / (4.0 * kBand * sw[a]);
      const double half = std::max(c * sx[a], std::min(kSpace * sx[a], band_limit));
      grid.half_extent[a] = half;
      if (half < kSpace * sx[a] || n / (4.0 * half) < kBand * sw[a]) ok = false;
    }
    if (ok || fixed || n >= (1 << 14)) return grid;
    n *= 2;
  }
}

double l2_norm(const SampledSignal& f) {
  KahanSum s;
  for (const auto& v : f.values) s.add(std::norm(v));
  return std::sqrt(s.value() * f.grid.cell_volume());
}

SampledSignal normalize(const SampledSignal& f) {
  const double nrm = l2_norm(f);
  if (!(nrm > 0.0) || !std::isfinite(nrm)) throw Error(Errc::ZeroSignal, "cannot normalize a zero or non-finite signal");
  SampledSignal out = f;
  if (nrm == 1.0) return out;
  for (auto& v : out.values) v /= nrm;
  return out;
}

std::vector<CVec> gradient(const SampledSignal& f) {
  const Grid& g = f.grid;
  const int nd = g.dim();
  std::vector<CVec> out(nd, CVec(g.size()));
  for (int a = 0; a < nd; ++a) {
    if (g.samples[a] < 3) throw Error(Errc::InvalidArgument, "gradient needs >= 3 samples per axis");
    std::size_t stride = 1;
    for (int b = a + 1; b < nd; ++b) stride *= static_cast<std::size_t>(g.samples[b]);
    const int n = g.samples[a];
    const double h = g.step(a);
    for (std::size_t lin = 0; lin < g.size(); ++lin) {
      const int i = static_cast<int>((lin / stride) % static_cast<std::size_t>(n));
      if (i == 0) {
        out[a][lin] = (f.values[lin + stride] - f.values[lin]) / h;
      } else if (i == n - 1) {
        out[a][lin] = (f.values[lin] - f.values[lin - stride]) / h;
      } else {
        out[a][lin] = (f.values[lin + stride] - f.values[lin - stride]) / (2.0 * h);
      }
    }
  }
  return out;
}

std::vector<CVec> spectral_gradient(const SampledSignal& f) {
  std::vector<CVec> out;
  for (int a = 0; a < f.grid.dim(); ++a) {
    out.push_back(spectral_derivative(f.values, f.grid.samples, a, f.grid.step(a)));
  }
  return out;
}

PolarField polar_decompose(const SampledSignal& f, double floor_rel, DerivativeScheme scheme) {
  const std::size_t total = f.grid.size();
  const int nd = f.grid.dim();
  PolarField p;
  p.magnitude.resize(total);
  double peak = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    p.magnitude[i] = std::abs(f.values[i]);
    peak = std::max(peak, p.magnitude[i]);
  }
  p.floor = floor_rel * peak;
  const auto grad = scheme == DerivativeScheme::spectral ? spectral_gradient(f) : gradient(f);
  p.phase_gradient.assign(nd, std::vector<double>(total, 0.0));
  p.mask.assign(total, 0);
  KahanSum all, off;
  for (std::size_t i = 0; i < total; ++i) {
    const double m2 = p.magnitude[i] * p.magnitude[i];
    all.add(m2);
    if (p.magnitude[i] < p.floor || m2 == 0.0) {
      off.add(m2);
      continue;
    }
    p.mask[i] = 1;
    for (int a = 0; a < nd; ++a) {
      p.phase_gradient[a][i] = std::imag(std::conj(f.values[i]) * grad[a][i]) / (2.0 * kPi * m2);
    }
  }
  p.masked_mass = all.value() > 0.0 ? off.value() / all.value() : 0.0;
  return p;
}

double lp_quadrature(std::span<const double> abs_values, double cell, double p) {
  if (!(p >= 1.0)) throw Error(Errc::InvalidArgument, "p must be >= 1");
  KahanSum s;
  if (p == 1.0) {
    for (double a : abs_values) s.add(a);
    return s.value() * cell;
  }
  if (p == 2.0) {
    for (double a : abs_values) s.add(a * a);
    return std::sqrt(s.value() * cell);
  }
  if (p == 1.5) {
    for (double a : abs_values) s.add(a * std::sqrt(a));
    return std::pow(s.value() * cell, 2.0 / 3.0);
  }
  for (double a : abs_values) s.add(std::pow(a, p));
  return std::pow(s.value() * cell, 1.0 / p);
}

double weighted_lp(const SampledSignal& f, Weight w, double p) {
  std::vector<double> a(f.grid.size());
  for_each_point(f.grid, [&](std::size_t lin, const double* x) {
    double wt = 1.0;
    if (w.kind == Weight::radius) {
      double r2 = 0.0;
      for (int k = 0; k < f.grid.dim(); ++k) r2 += x[k] * x[k];
      wt = std::sqrt(r2);
    } else if (w.kind == Weight::axis) {
      wt = std::abs(x[w.axis_index]);
    }
    a[lin] = wt * std::abs(f.values[lin]);
  });
  return lp_quadrature(a, f.grid.cell_volume(), p);
}

double lp_norm(const SampledSignal& f, double p) { return weighted_lp(f, Weight{}, p); }

nlohmann::json grid_to_json(const Grid& g) { return {{"samples", g.samples}, {"half_extent", g.half_extent}}; }

namespace {

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> keys, Errc code, const char* what) {
  if (!j.is_object()) throw Error(code, std::string(what) + " must be a JSON object");
  for (const auto& item : j.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return item.key() == k; })) {
      throw Error(code, std::string("unknown ") + what + " key '" + item.key() + "'");
    }
  }
}

}  // namespace

Grid grid_from_json(const nlohmann::json& j) {
  reject_unknown(j, {"samples", "half_extent"}, Errc::SignalLoad, "grid");
  try {
    Grid g{j.at("samples").get<std::vector<int>>(), j.at("half_extent").get<std::vector<double>>()};
    g.validate();
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::SignalLoad, std::string("bad grid: ") + e.what());
  }
}

nlohmann::json signal_to_json(const SampledSignal& f) {
  std::vector<double> re(f.values.size()), im(f.values.size());
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    re[i] = f.values[i].real();
    im[i] = f.values[i].imag();
  }
  return {{"grid", grid_to_json(f.grid)}, {"re", re}, {"im", im}};
}

SampledSignal signal_from_json(const nlohmann::json& j) {
  reject_unknown(j, {"grid", "re", "im"}, Errc::SignalLoad, "signal");
  try {
    SampledSignal f{grid_from_json(j.at("grid")), {}};
    const auto re = j.at("re").get<std::vector<double>>();
    const auto im = j.at("im").get<std::vector<double>>();
    if (re.size() != f.grid.size() || im.size() != f.grid.size()) {
      throw Error(Errc::SignalLoad, "re/im length does not match grid");
    }
    f.values.resize(re.size());
    for (std::size_t i = 0; i < re.size(); ++i) {
      if (!std::isfinite(re[i]) || !std::isfinite(im[i])) throw Error(Errc::SignalLoad, "non-finite sample");
      f.values[i] = cd(re[i], im[i]);
    }
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::SignalLoad, std::string("bad signal: ") + e.what());
  }
}

nlohmann::json chirp_to_json(const GaussianChirp& g) {
  nlohmann::json eps = std::isinf(g.epsilon) ? nlohmann::json("inf") : nlohmann::json(g.epsilon);
  return {{"zeta", g.zeta}, {"epsilon", eps}, {"beta", g.beta}};
}

GaussianChirp chirp_from_json(const nlohmann::json& j) {
  reject_unknown(j, {"zeta", "epsilon", "beta"}, Errc::ConfigParse, "gaussian_chirp");
  try {
    GaussianChirp g;
    g.zeta = j.at("zeta").get<std::vector<double>>();
    const auto& e = j.at("epsilon");
    if (e.is_string()) {
      const auto s = e.get<std::string>();
      if (s != "inf") throw Error(Errc::ConfigParse, "epsilon must be a number or \"inf\"");
      g.epsilon = std::numeric_limits<double>::infinity();
    } else {
      g.epsilon = e.get<double>();
    }
    g.beta = j.value("beta", 0.0);
    g.validate();
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ConfigParse, std::string("bad gaussian_chirp: ") + e.what());
  }
}

}  // namespace fmtk
