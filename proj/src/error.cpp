#include <segrisk/error.hpp>

namespace segrisk {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ValueOutOfRange: return "ValueOutOfRange";
    case ErrorCode::NonBinaryMask: return "NonBinaryMask";
    case ErrorCode::InvalidDimensions: return "InvalidDimensions";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::LambdaOutOfRange: return "LambdaOutOfRange";
    case ErrorCode::EmptyCalibrationSet: return "EmptyCalibrationSet";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::NotFeasible: return "NotFeasible";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::ManifestParse: return "ManifestParse";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void raise(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace segrisk
