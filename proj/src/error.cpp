#include "latentlab/error.hpp"

namespace latentlab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::UnknownAttribute: return "UnknownAttribute";
    case ErrorKind::InfeasibleAngles: return "InfeasibleAngles";
    case ErrorKind::NoAttributePairs: return "NoAttributePairs";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::DegenerateData: return "DegenerateData";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::ClassifierTrainingFailed: return "ClassifierTrainingFailed";
    case ErrorKind::BiasUnreachable: return "BiasUnreachable";
    case ErrorKind::ZeroGradient: return "ZeroGradient";
    case ErrorKind::EmptySampleSet: return "EmptySampleSet";
    case ErrorKind::DegenerateCombination: return "DegenerateCombination";
    case ErrorKind::DegenerateProjection: return "DegenerateProjection";
    case ErrorKind::EditAborted: return "EditAborted";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::FormatError: return "FormatError";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch:
    case ErrorKind::InvalidArgument:
    case ErrorKind::UnknownAttribute:
    case ErrorKind::InfeasibleAngles:
    case ErrorKind::NoAttributePairs:
    case ErrorKind::ConfigError:
      return ErrorCategory::config;
    case ErrorKind::IoError:
    case ErrorKind::FormatError:
      return ErrorCategory::io;
    default:
      return ErrorCategory::numerical;
  }
}

std::string_view to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::config: return "config";
    case ErrorCategory::numerical: return "numerical";
    case ErrorCategory::io: return "io";
  }
  return "unknown";
}

int exit_code_for(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::config: return 2;
    case ErrorCategory::numerical: return 3;
    case ErrorCategory::io: return 4;
  }
  return 1;
}

}  // namespace latentlab
