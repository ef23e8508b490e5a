#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace beamgeo {

enum class Errc {
  InvalidArgument,
  InvalidField,
  EmptyEnsemble,
  ZeroWeight,
  InvalidCount,
  OffShellSample,
  OutOfLattice,
  ZeroStrength,
  ParseError,
  DuplicateKey,
  NegativeLength,
  OffShell,
  OffShellInitial,
  StepTooLarge,
  MismatchedSampling,
  ReferenceSpanExceeded,
  UnsupportedElement,
  WronskianDrift,
  OutOfSpan,
  ResidualTooLarge,
  MismatchedGrid,
  DegenerateFit,
  Io,
};

std::string_view to_string(Errc code);

// All domain failures in the library are reported through this type; the
// code identifies the failure class, what() carries a one-line diagnostic.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }
  /// The diagnostic without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  Errc code_;
  std::string message_;
};

}  // namespace beamgeo
