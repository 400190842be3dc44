#include "fmtk/error.hpp"

namespace fmtk {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::DimensionOdd: return "DimensionOdd";
    case Errc::NotSymplectic: return "NotSymplectic";
    case Errc::SingularB: return "SingularB";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::DegenerateParameter: return "DegenerateParameter";
    case Errc::GridTooSmall: return "GridTooSmall";
    case Errc::ZeroSignal: return "ZeroSignal";
    case Errc::NyquistViolated: return "NyquistViolated";
    case Errc::TooLarge: return "TooLarge";
    case Errc::NotCentered: return "NotCentered";
    case Errc::DiagonalRequired: return "DiagonalRequired";
    case Errc::ShapeRequired: return "ShapeRequired";
    case Errc::ConfigParse: return "ConfigParse";
    case Errc::SignalLoad: return "SignalLoad";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::MismatchBeyondTolerance: return "MismatchBeyondTolerance";
  }
  return "Unknown";
}

}  // namespace fmtk
