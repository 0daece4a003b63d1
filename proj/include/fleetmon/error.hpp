#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fleetmon {

enum class ErrorCode {
  InvalidArgument,
  NonFiniteInput,
  DegenerateScale,
  WindowTooShort,
  CutoffBelowResolution,
  FlatSpectrum,
  HarmonicOutOfRange,
  UpsamplingRequested,
  DimensionMismatch,
  LengthMismatch,
  PsiTooLarge,
  UnknownMachine,
  UndefinedCorrelation,
  SingleLeaf,
  DegenerateFleet,
  InvalidConfig,
  IoError,
  ParseError,
  RateMismatch,
  RaggedColumns,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fleetmon
