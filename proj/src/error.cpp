#include "gnnrec/error.hpp"

namespace gnnrec {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidDegree: return "InvalidDegree";
    case ErrorCode::GenerationFailed: return "GenerationFailed";
    case ErrorCode::InvalidShape: return "InvalidShape";
    case ErrorCode::InvalidActivation: return "InvalidActivation";
    case ErrorCode::NotEnoughSamples: return "NotEnoughSamples";
    case ErrorCode::EmptySubset: return "EmptySubset";
    case ErrorCode::InvalidLabel: return "InvalidLabel";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::NoLinearRegime: return "NoLinearRegime";
    case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorCode::DegenerateTensor: return "DegenerateTensor";
    case ErrorCode::DecompositionFailed: return "DecompositionFailed";
    case ErrorCode::IllConditionedDirections: return "IllConditionedDirections";
    case ErrorCode::DegenerateReference: return "DegenerateReference";
    case ErrorCode::EmptyList: return "EmptyList";
    case ErrorCode::InvalidDomain: return "InvalidDomain";
    case ErrorCode::EmptyResults: return "EmptyResults";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

}  // namespace gnnrec
