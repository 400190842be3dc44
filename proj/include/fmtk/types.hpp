#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace fmtk {

using cd = std::complex<double>;
using CVec = std::vector<cd>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846264338327950288;

// Neumaier-compensated sum; used for every quadrature so printed digits do not
// depend on accumulation order subtleties.
class KahanSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      c_ += (sum_ - t) + x;
    } else {
      c_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + c_; }

 private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

class KahanComplex {
 public:
  void add(cd z) {
    re_.add(z.real());
    im_.add(z.imag());
  }
  cd value() const { return {re_.value(), im_.value()}; }

 private:
  KahanSum re_;
  KahanSum im_;
};

}  // namespace fmtk
