#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "fmtk/types.hpp"

namespace fmtk {

inline constexpr double kSymplecticTol = 1e-10;

// 2N x 2N real symplectic matrix. Only validate_symplectic (and the helpers
// built on it) can create one, so every instance satisfies MᵀJM = J.
class SympMatrix {
 public:
  int n() const { return n_; }
  const Mat& matrix() const { return m_; }
  double residual() const { return residual_; }

  auto A() const { return m_.topLeftCorner(n_, n_); }
  auto B() const { return m_.topRightCorner(n_, n_); }
  auto C() const { return m_.bottomLeftCorner(n_, n_); }
  auto D() const { return m_.bottomRightCorner(n_, n_); }

 private:
  SympMatrix(Mat m, double residual)
      : n_(static_cast<int>(m.rows() / 2)), m_(std::move(m)), residual_(residual) {}
  friend SympMatrix validate_symplectic(const Mat& m, double tol);

  int n_;
  Mat m_;
  double residual_;
};

// Symplectic matrix with invertible B, the parameter of a free metaplectic
// transformation.
struct FreeSympMatrix {
  SympMatrix base;
  Mat b_inverse;
  double det_b = 0.0;
  double abs_det_b = 0.0;

  int n() const { return base.n(); }
  auto A() const { return base.A(); }
  auto B() const { return base.B(); }
  auto C() const { return base.C(); }
  auto D() const { return base.D(); }
};

Mat standard_j(int n);
Mat assemble_blocks(const Mat& a, const Mat& b, const Mat& c, const Mat& d);

// max(|MᵀJM − J|_max, |MJMᵀ − J|_max)
double symplectic_residual(const Mat& m);

// The tolerance is relative: the residual is compared to tol * max(1, |M|_max²).
SympMatrix validate_symplectic(const Mat& m, double tol = kSymplecticTol);
FreeSympMatrix make_free(const SympMatrix& m, double tol = kSymplecticTol);

SympMatrix inverse(const SympMatrix& m);
SympMatrix compose(const SympMatrix& m1, const SympMatrix& m2);

// Generating-function parameterization: D = PB, A = BQ, C = PBQ − B⁻ᵀ.
FreeSympMatrix free_from_generators(const Mat& p, const Mat& b, const Mat& q);
FreeSympMatrix random_free(int n, std::uint64_t seed);

enum class Table1Kind { fourier, frft, fresnel, lorentz };

Table1Kind parse_table1_kind(const std::string& name);
const char* table1_kind_name(Table1Kind kind);

// params: angles for frft/lorentz, diagonal of B for fresnel, unused for fourier.
SympMatrix table1_matrix(Table1Kind kind, const std::vector<double>& params, int n);

bool is_diagonal(const Mat& m, double tol = 0.0);

nlohmann::json matrix_to_json(const SympMatrix& m);
SympMatrix matrix_from_json(const nlohmann::json& j, double tol = kSymplecticTol);

}  // namespace fmtk
