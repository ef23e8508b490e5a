#include "beamgeo/error.hpp"

namespace beamgeo {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::InvalidField: return "InvalidField";
    case Errc::EmptyEnsemble: return "EmptyEnsemble";
    case Errc::ZeroWeight: return "ZeroWeight";
    case Errc::InvalidCount: return "InvalidCount";
    case Errc::OffShellSample: return "OffShellSample";
    case Errc::OutOfLattice: return "OutOfLattice";
    case Errc::ZeroStrength: return "ZeroStrength";
    case Errc::ParseError: return "ParseError";
    case Errc::DuplicateKey: return "DuplicateKey";
    case Errc::NegativeLength: return "NegativeLength";
    case Errc::OffShell: return "OffShell";
    case Errc::OffShellInitial: return "OffShellInitial";
    case Errc::StepTooLarge: return "StepTooLarge";
    case Errc::MismatchedSampling: return "MismatchedSampling";
    case Errc::ReferenceSpanExceeded: return "ReferenceSpanExceeded";
    case Errc::UnsupportedElement: return "UnsupportedElement";
    case Errc::WronskianDrift: return "WronskianDrift";
    case Errc::OutOfSpan: return "OutOfSpan";
    case Errc::ResidualTooLarge: return "ResidualTooLarge";
    case Errc::MismatchedGrid: return "MismatchedGrid";
    case Errc::DegenerateFit: return "DegenerateFit";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

}  // namespace beamgeo
