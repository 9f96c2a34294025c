#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace latentlab {

enum class ErrorKind {
  // configuration / caller errors
  DimensionMismatch,
  InvalidArgument,
  UnknownAttribute,
  InfeasibleAngles,
  NoAttributePairs,
  ConfigError,
  // numerical degeneracy
  DegenerateData,
  NonFiniteLoss,
  ClassifierTrainingFailed,
  BiasUnreachable,
  ZeroGradient,
  EmptySampleSet,
  DegenerateCombination,
  DegenerateProjection,
  EditAborted,
  // persistence
  IoError,
  FormatError,
};

enum class ErrorCategory { config, numerical, io };

std::string_view to_string(ErrorKind kind);
ErrorCategory category_of(ErrorKind kind);
std::string_view to_string(ErrorCategory category);
// Process exit code for an error category: config 2, numerical 3, io 4.
int exit_code_for(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  ErrorCategory category() const noexcept { return category_of(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace latentlab
