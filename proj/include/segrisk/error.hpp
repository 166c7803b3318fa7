#pragma once

#include <stdexcept>
#include <string>

namespace segrisk {

enum class ErrorCode {
  ShapeMismatch,
  ValueOutOfRange,
  NonBinaryMask,
  InvalidDimensions,
  InvalidGrid,
  LambdaOutOfRange,
  EmptyCalibrationSet,
  GridMismatch,
  NotFeasible,
  ConfigInvalid,
  TooFewSamples,
  BadMagic,
  TruncatedFile,
  ManifestParse,
  MissingFile,
  DimMismatch,
  IoFailure,
};

const char* to_string(ErrorCode code);

// Single exception type for the whole library; the code tells callers
// (and the CLI exit-code mapping) what went wrong.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& message);

}  // namespace segrisk
