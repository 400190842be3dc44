#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "json.hpp"

#include "fmtk/types.hpp"

namespace fmtk {

// Uniform centered box [−L_j, L_j) per axis. Index i on axis j sits at
// (i − n_j/2)·h_j with h_j = 2L_j/n_j, so index n_j/2 is the origin.
struct Grid {
  std::vector<int> samples;
  std::vector<double> half_extent;

  int dim() const { return static_cast<int>(samples.size()); }
  std::size_t size() const;
  double step(int axis) const { return 2.0 * half_extent[axis] / samples[axis]; }
  double coord(int axis, int index) const { return (index - samples[axis] / 2) * step(axis); }
  double cell_volume() const;
  std::vector<double> axis_coords(int axis) const;

  // Frequency grid reached by the centered DFT: same counts, step 1/(2L_j).
  Grid conjugate() const;
  // Same box, `factor` times more samples per axis.
  Grid refined(int factor) const;

  // Throws InvalidArgument unless every axis has an even count >= 8 and a
  // finite positive extent.
  void validate() const;

  bool operator==(const Grid&) const = default;
};

Grid uniform_grid(int n, int samples, double half_extent);

// Calls fn(linear_index, x) for every point in row-major order; x points to
// dim() coordinates.
template <class Fn>
void for_each_point(const Grid& g, Fn&& fn) {
  const int nd = g.dim();
  std::vector<int> idx(nd, 0);
  std::vector<double> x(nd);
  for (int a = 0; a < nd; ++a) x[a] = g.coord(a, 0);
  const std::size_t total = g.size();
  for (std::size_t lin = 0; lin < total; ++lin) {
    fn(lin, static_cast<const double*>(x.data()));
    for (int a = nd - 1; a >= 0; --a) {
      if (++idx[a] < g.samples[a]) {
        x[a] = g.coord(a, idx[a]);
        break;
      }
      idx[a] = 0;
      x[a] = g.coord(a, 0);
    }
  }
}

struct SampledSignal {
  Grid grid;
  CVec values;
};

// f(x) = π^{−N/4}(∏ζ_k)^{−1/4} exp(−Σ x_k²/(2ζ_k)) exp(2πi(|x|²/(2ε) + β)).
// epsilon = ±infinity means no chirp.
struct GaussianChirp {
  std::vector<double> zeta;
  double epsilon = std::numeric_limits<double>::infinity();
  double beta = 0.0;

  int dim() const { return static_cast<int>(zeta.size()); }
  double inv_epsilon() const;
  void validate() const;
};

SampledSignal sample_gaussian_chirp(const GaussianChirp& g, const Grid& grid);

// Smallest grid (power-of-two sample count, at least 128 per axis for N <= 2
// and 48 for N = 3) that holds the signal to ~1e-8 tail mass in space and keeps
// its spectrum well inside the Nyquist band. `samples` > 0 fixes the count.
Grid default_grid(const GaussianChirp& g, int samples = 0);

// Fraction of |f|² outside the box, from the closed form.
double gaussian_tail_mass(const GaussianChirp& g, const Grid& grid);

double l2_norm(const SampledSignal& f);
SampledSignal normalize(const SampledSignal& f);

enum class DerivativeScheme { spectral, central };

struct PolarField {
  std::vector<double> magnitude;
  std::vector<std::vector<double>> phase_gradient;  // one array per axis
  std::vector<char> mask;
  double floor = 0.0;
  double masked_mass = 0.0;  // fraction of ‖f‖² that falls off the mask
};

// ∇φ = Im(f̄∇f)/(2π|f|²) on {|f| ≥ floor_rel·max|f|}, zero elsewhere.
PolarField polar_decompose(const SampledSignal& f, double floor_rel = 1e-8,
                           DerivativeScheme scheme = DerivativeScheme::spectral);

// Central differences inside, first-order one-sided at the two ends.
std::vector<CVec> gradient(const SampledSignal& f);
// Exact derivative of the band-limited interpolant.
std::vector<CVec> spectral_gradient(const SampledSignal& f);

// (Σ a_i^p · cell)^{1/p} with cheap paths for p = 1, 1.5, 2.
double lp_quadrature(std::span<const double> abs_values, double cell, double p);

struct Weight {
  enum Kind { one, radius, axis } kind = one;
  int axis_index = 0;
};

double lp_norm(const SampledSignal& f, double p);
double weighted_lp(const SampledSignal& f, Weight w, double p);

nlohmann::json grid_to_json(const Grid& g);
Grid grid_from_json(const nlohmann::json& j);
nlohmann::json signal_to_json(const SampledSignal& f);
SampledSignal signal_from_json(const nlohmann::json& j);
nlohmann::json chirp_to_json(const GaussianChirp& g);
GaussianChirp chirp_from_json(const nlohmann::json& j);

}  // namespace fmtk
