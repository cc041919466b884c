#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gnnrec {

enum class ErrorCode {
  InvalidDegree,
  GenerationFailed,
  InvalidShape,
  InvalidActivation,
  NotEnoughSamples,
  EmptySubset,
  InvalidLabel,
  TooLarge,
  Diverged,
  NoLinearRegime,
  DegenerateSpectrum,
  DegenerateTensor,
  DecompositionFailed,
  IllConditionedDirections,
  DegenerateReference,
  EmptyList,
  InvalidDomain,
  EmptyResults,
  InvalidArgument,
  Io,
  Parse,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (and the Python binding) can dispatch on the kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gnnrec
