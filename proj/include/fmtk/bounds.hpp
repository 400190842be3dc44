#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fmtk/moments.hpp"
#include "fmtk/symplectic.hpp"
#include "fmtk/transform.hpp"

namespace fmtk {

// Right-hand sides. All of them are matrix arithmetic on a MomentSummary.

// [Σ_j (|(A₁B₂ᵀ − B₁A₂ᵀ)_jj|²/16π² + |(A₁XA₂ᵀ + B₁WB₂ᵀ + A₁CB₂ᵀ + B₁CᵀA₂ᵀ)_jj|²)^{1/2}]²
double bound_componentwise(const MomentSummary& mom, const FreeSympMatrix& m1, const FreeSympMatrix& m2);

// tr(A₂ᵀA₁X) + tr(B₁ᵀB₂W) + tr((A₁ᵀB₂ + A₂ᵀB₁)Cᵀ): the bracket of the trace bound.
double trace_term(const MomentSummary& mom, const Mat& a1, const Mat& b1, const Mat& a2, const Mat& b2);
double bound_trace(const MomentSummary& mom, const FreeSympMatrix& m1, const FreeSympMatrix& m2);

// tr(AX) + tr(BCᵀ): the bracket of the time–FMT bound.
double time_fmt_term(const MomentSummary& mom, const FreeSympMatrix& m);
double bound_time_fmt(const MomentSummary& mom, const FreeSympMatrix& m);

struct LpBound {
  double lhs = 0.0;
  double rhs = 0.0;
};

// Lᵖ versions; the weighted norms come from quadrature:
// norm1 = ‖u L_{M₁}f‖_p, norm2 = ‖u L_{M₂}f‖_p, xnorm = ‖x f‖_p.
LpBound bound_lp_two_fmt(const MomentSummary& mom, const FreeSympMatrix& m1, const FreeSympMatrix& m2, double p,
                         double norm1, double norm2);
LpBound bound_lp_time_fmt(const MomentSummary& mom, const FreeSympMatrix& m, double p, double xnorm,
                          double unorm);
// With conjugate exponent q. At p = 1 (q = ∞) the q-th root of both sides is
// taken: ‖xf‖₁‖uLf‖₁ ≥ |det B|^{1/2} max(|tr B|/4π, |T|).
LpBound bound_lq_time_fmt(const MomentSummary& mom, const FreeSympMatrix& m, double p, double xnorm,
                          double unorm);

// Same bounds with the norms computed here from a sampled signal.
LpBound bound_lp_two_fmt(const SampledSignal& f, const FreeSympMatrix& m1, const FreeSympMatrix& m2, double p);
LpBound bound_lp_time_fmt(const SampledSignal& f, const FreeSympMatrix& m, double p);
LpBound bound_lq_time_fmt(const SampledSignal& f, const FreeSympMatrix& m, double p);

// Metaplectic-operator forms written with M₁JM₂ᵀ and M₁ΣM₂ᵀ.
double bound_mo_component(const MomentSummary& mom, const SympMatrix& m1, const SympMatrix& m2);
double bound_mo_trace(const MomentSummary& mom, const SympMatrix& m1, const SympMatrix& m2);

// Requires diagonal A₁, B₁, A₂, B₂ (DiagonalRequired otherwise).
double bound_extra_strong_diag(const MomentSummary& mom, const SympMatrix& m1, const SympMatrix& m2);

// A_k = a_k S and B_k = b_k S for one sign matrix S = diag(±1).
struct ScalarShape {
  double a1, b1, a2, b2;
};
std::optional<ScalarShape> scalar_shape(const SympMatrix& m1, const SympMatrix& m2);

struct ExtraStrongScalar {
  double rhs = 0.0;
  // Present when a_k b_k ≥ 0 for both k, so that replacing a_k, b_k by their
  // singular values |a_k|, |b_k| leaves the left side unchanged.
  std::optional<double> singular_rhs;
  std::optional<double> abs_cov_rhs;  // the weaker form built on |Cov| = Σ_j|Cov^{jj}|
};
// Throws ShapeRequired unless scalar_shape applies.
ExtraStrongScalar bound_extra_strong_scalar(const MomentSummary& mom, const SympMatrix& m1, const SympMatrix& m2);

// Eigenvalues (ascending) of a complex Hermitian matrix, by cyclic Jacobi
// rotations on the real symmetric embedding [[Re, −Im], [Im, Re]].
std::vector<double> hermitian_eigenvalues(const Eigen::MatrixXcd& h, double tol = 1e-14);

struct RsCheck {
  double min_eigenvalue = 0.0;
  bool psd = false;
};
// Υ + (i/4π)Ω with Υ = DΣDᵀ, Ω = DJDᵀ, D = [[A₁, B₁], [A₂, B₂]].
RsCheck robertson_schrodinger_check(const MomentSummary& mom, const SympMatrix& m1, const SympMatrix& m2);

// Both identities used in the trace-bound argument, evaluated on a transform
// computed with its gradient. M₃ = (A₂, B₂; ·, ·)M₁⁻¹ supplies
// B₃ = B₂A₁ᵀ − A₂B₁ᵀ and A₃ = A₂D₁ᵀ − B₂C₁ᵀ.
struct IdentityGap {
  cd lhs;
  cd rhs;
  double scale = 0.0;      // Σ |terms| of rhs
  double real_gap = 0.0;   // |Re(lhs − rhs)| / max(scale, 1e-12)
  double imag_gap = 0.0;   // |Im(lhs − rhs)|
  bool pass(double rel_tol = 1e-3, double abs_tol = 1e-3) const { return real_gap <= rel_tol && imag_gap <= abs_tol; }
};

struct LemmaCheck {
  IdentityGap first;   // i∫uᵀL·B₃·conj(∇L) du
  IdentityGap second;  // 2π∫uᵀA₃u|L|² du
};

LemmaCheck lemma_identity_check(const ShearedTransform& t1, const MomentSummary& mom, const FreeSympMatrix& m1,
                                const Mat& a2, const Mat& b2);
LemmaCheck lemma_identity_check(const SampledSignal& f, const FreeSympMatrix& m1, const Mat& a2, const Mat& b2);

// bound_componentwise ≥ bound_trace − tol.
bool bound_ordering_check(const MomentSummary& mom, const FreeSympMatrix& m1, const FreeSympMatrix& m2,
                          double tol = 1e-10);

struct BoundEntry {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  double tolerance = 0.0;  // absolute; pass ⇔ slack ≥ −tolerance
  bool pass = false;
  bool approximate = false;
};

struct BoundReport {
  std::string signal_id;
  std::string m1_id;
  std::string m2_id;
  std::vector<BoundEntry> entries;
  std::string error;  // non-empty when the cell could not be evaluated

  bool all_pass() const;
};

// Inequality entry with tolerance rel·|lhs|.
BoundEntry make_entry(std::string name, double lhs, double rhs, double rel_tol, bool approximate = false);
// Entry with an absolute tolerance.
BoundEntry make_abs_entry(std::string name, double lhs, double rhs, double abs_tol);

nlohmann::json report_to_json(const BoundReport& r);

}  // namespace fmtk
