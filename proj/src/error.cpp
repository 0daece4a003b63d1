#include "fleetmon/error.hpp"

namespace fleetmon {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::DegenerateScale: return "DegenerateScale";
    case ErrorCode::WindowTooShort: return "WindowTooShort";
    case ErrorCode::CutoffBelowResolution: return "CutoffBelowResolution";
    case ErrorCode::FlatSpectrum: return "FlatSpectrum";
    case ErrorCode::HarmonicOutOfRange: return "HarmonicOutOfRange";
    case ErrorCode::UpsamplingRequested: return "UpsamplingRequested";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::PsiTooLarge: return "PsiTooLarge";
    case ErrorCode::UnknownMachine: return "UnknownMachine";
    case ErrorCode::UndefinedCorrelation: return "UndefinedCorrelation";
    case ErrorCode::SingleLeaf: return "SingleLeaf";
    case ErrorCode::DegenerateFleet: return "DegenerateFleet";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::RateMismatch: return "RateMismatch";
    case ErrorCode::RaggedColumns: return "RaggedColumns";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace fleetmon
