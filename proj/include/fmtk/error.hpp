#pragma once

#include <stdexcept>
#include <string>

namespace fmtk {

enum class Errc {
  DimensionOdd,
  NotSymplectic,
  SingularB,
  DimensionMismatch,
  DegenerateParameter,
  GridTooSmall,
  ZeroSignal,
  NyquistViolated,
  TooLarge,
  NotCentered,
  DiagonalRequired,
  ShapeRequired,
  ConfigParse,
  SignalLoad,
  InvalidArgument,
  MismatchBeyondTolerance,
};

const char* errc_name(Errc code);

// Every failure in the library is reported through this type. `value` carries
// the offending number (residual, determinant, tail mass) when there is one;
// `axis` is set for per-axis failures such as aliasing.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what, double value = 0.0, int axis = -1)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code),
        value_(value),
        axis_(axis) {}

  Errc code() const noexcept { return code_; }
  double value() const noexcept { return value_; }
  int axis() const noexcept { return axis_; }

 private:
  Errc code_;
  double value_;
  int axis_;
};

}  // namespace fmtk
