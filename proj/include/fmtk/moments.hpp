#pragma once

#include "json.hpp"

#include "fmtk/grid.hpp"
#include "fmtk/symplectic.hpp"
#include "fmtk/types.hpp"

namespace fmtk {

// Second-order moments of a unit signal. X, W and CovXW are taken about the
// measured means, CovXW(j, k) = ∫(x_j − ⟨x_j⟩)(∂_kφ − ⟨w_k⟩)|f|².
struct MomentSummary {
  Vec mean_x;
  Vec mean_w;
  double dx2 = 0.0;
  double dw2 = 0.0;
  double cov = 0.0;
  double cov_abs_total = 0.0;     // ∫|x||∇φ||f|², Euclidean norms
  double cov_abs_diag_sum = 0.0;  // Σ_j |CovXW(j, j)|
  Mat cov_abs_per_pair;           // ∫|x_j||∂_kφ||f|²
  Mat X;
  Mat W;
  Mat CovXW;
  Mat Sigma;

  // Quadrature diagnostics; zero for closed-form summaries.
  double norm2 = 1.0;
  double masked_mass = 0.0;
  bool approximate = false;  // masked_mass above 1e-8
  double w_crosscheck = 0.0;  // max |W − W from ∫∂f ∂f̄/4π²|

  int dim() const { return static_cast<int>(X.rows()); }
};

struct MomentOptions {
  double floor_rel = 1e-8;
  DerivativeScheme scheme = DerivativeScheme::spectral;
  bool require_centered = true;
  double center_tol = 1e-6;
};

MomentSummary compute_moments(const SampledSignal& f, const PolarField& polar, const MomentOptions& opt = {});
MomentSummary compute_moments(const SampledSignal& f, const MomentOptions& opt = {});

MomentSummary analytic_gaussian_moments(const GaussianChirp& g);

// Fills the scalar fields and Σ from the three blocks.
void finish_summary(MomentSummary& m);

// ∫xᵀAᵀAx|f|² + ∫wᵀBᵀBw|f̂|² + 2∫xᵀAᵀB∇φ|f|² as traces against the blocks.
double moment_identity(const MomentSummary& mom, const Mat& a, const Mat& b);

struct SecondMoment {
  double direct = 0.0;    // ∫|u L_M f(u)|² du by quadrature
  double identity = 0.0;  // moment_identity with M's blocks
};

SecondMoment second_moment_fmt(const SampledSignal& f, const FreeSympMatrix& m, const MomentSummary& mom);
SecondMoment second_moment_fmt(const SampledSignal& f, const FreeSympMatrix& m);

// Σ from the second moments of the Wigner distribution.
Mat sigma_via_wigner(const SampledSignal& f);

struct Recentered {
  SampledSignal signal;
  Vec shift_x;  // the signal was translated by −shift_x
  Vec shift_w;  // and modulated by e^{−2πi shift_w·x}
};

// Translation is a spectral phase ramp (exact for band-limited samples); the
// frequency mean is removed by modulation.
Recentered recenter(const SampledSignal& f);

nlohmann::json moments_to_json(const MomentSummary& m);

}  // namespace fmtk
