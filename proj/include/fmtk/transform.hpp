#pragma once

#include <optional>
#include <vector>

#include "fmtk/grid.hpp"
#include "fmtk/symplectic.hpp"

namespace fmtk {

// Both paths evaluate
//   L_M f(u) = c · exp(πi uᵀDB⁻¹u) · ĝ(B⁻¹u),   g(x) = f(x) exp(πi xᵀB⁻¹Ax),
// with c = e^{−iπN/4}/√det B. The input is first interpolated (band-limited)
// onto a grid `oversample` times finer so that the chirped g is resolved.
enum class FmtPath { fast_diagonal_b, direct_dft };

struct FmtPlan {
  FreeSympMatrix matrix;
  Grid in_grid;
  Grid out_grid;
  FmtPath path = FmtPath::direct_dft;
  int oversample = 1;
  cd phase_constant;
};

// e^{−iπN/4}/√det B on the principal branch; for det B < 0 the extra e^{−iπ/2}
// from √det B = i√|det B| is folded in.
cd fmt_phase_constant(const FreeSympMatrix& m);

// Fraction of spectral energy in the outer 10% of the band on each axis.
std::vector<double> outer_band_fraction(const CVec& spectrum, const std::vector<int>& dims);

// Smallest factor in {1, 2, 4, 8, 16} that resolves the chirped input and,
// when given, reaches every frequency B⁻¹u of out_grid. Throws
// NyquistViolated if f itself is not resolved on its grid or no factor works.
int required_oversample(const FreeSympMatrix& m, const SampledSignal& f, const Grid* out_grid = nullptr);

// Lattice output grid used by the fast path: samples s·n_j, half-extent
// |b_jj|·s/(2h_j).
Grid fast_out_grid(const FreeSympMatrix& m, const Grid& in_grid, int oversample);

// Box covering the image of f's phase-space support under M, sampled finely
// enough for the frequency content of L_M f.
Grid default_out_grid(const FreeSympMatrix& m, const SampledSignal& f);

FmtPlan make_plan(const FreeSympMatrix& m, const SampledSignal& f, std::optional<Grid> out_grid = std::nullopt);
SampledSignal fmt_apply(const FmtPlan& plan, const SampledSignal& f);
SampledSignal fmt_apply(const FreeSympMatrix& m, const SampledSignal& f,
                        std::optional<Grid> out_grid = std::nullopt);

// Oracle: the defining integral as a plain Riemann sum over every (x, u) pair,
// on the same refined input grid fmt_apply would use. Cost ∝ P_in·P_out;
// throws TooLarge above 2^27 pairs.
SampledSignal fmt_direct(const FreeSympMatrix& m, const SampledSignal& f, const Grid& out_grid);

// L_M f on the lattice u = B·w, w running over the conjugate grid of the
// refined input grid. Works for any free M; |det B|·Δw^N is the cell volume.
struct ShearedTransform {
  Mat b;
  double abs_det_b = 1.0;
  Grid w_grid;
  CVec values;
  std::vector<CVec> gradient;  // ∂/∂u_j of L_M f, filled on request
  int oversample = 1;

  int dim() const { return w_grid.dim(); }
  double cell_volume() const { return abs_det_b * w_grid.cell_volume(); }

  template <class Fn>
  void for_each_point(Fn&& fn) const {
    const int n = dim();
    std::vector<double> u(n);
    fmtk::for_each_point(w_grid, [&](std::size_t lin, const double* w) {
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += b(j, k) * w[k];
        u[j] = s;
      }
      fn(lin, static_cast<const double*>(u.data()));
    });
  }
};

ShearedTransform fmt_sheared(const FreeSympMatrix& m, const SampledSignal& f, int oversample = 0,
                             bool with_gradient = false);

double sheared_l2_norm(const ShearedTransform& t);
// ∫|u|²|L_M f(u)|² du
double sheared_second_moment(const ShearedTransform& t);
// (∫ (|u|·|L_M f(u)|)^p du)^{1/p}
double sheared_weighted_lp(const ShearedTransform& t, double p);

// min over γ of ‖a − e^{iγ}b‖ / ‖b‖ (or without the phase freedom).
double relative_l2_distance(const CVec& a, const CVec& b, bool up_to_phase);

// Wigner distribution W(x, w) = ∫ f(x + y/2) f̄(x − y/2) e^{−2πi w·y} dy on
// f.grid × w_grid. w_grid must have half-extent 1/(2h_j) and an even number
// K_j ≥ 2n_j of samples; wigner_w_grid gives the smallest one.
Grid wigner_w_grid(const Grid& x_grid);

struct WignerTable {
  Grid x_grid;
  Grid w_grid;
  std::vector<double> values;  // row-major, x index outer, w index inner
  double max_imag = 0.0;
};

WignerTable wigner(const SampledSignal& f, const Grid& w_grid);

// Streaming reductions over the Wigner distribution without storing it.
struct WignerMoments {
  double mass = 0.0;
  Vec mean;                         // (⟨x⟩, ⟨w⟩)
  Mat sigma;                        // central second moments, 2N × 2N
  std::vector<double> x_marginal;   // ∫W dw on f.grid
  std::vector<double> w_marginal;   // ∫W dx on wigner_w_grid
  double max_imag = 0.0;
};

WignerMoments wigner_moments(const SampledSignal& f);

}  // namespace fmtk
