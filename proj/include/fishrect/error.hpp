#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fishrect {

enum class ErrorKind {
  NonPositiveDepth,
  InvalidRotation,
  OutOfDomain,
  Inadmissible,
  OutOfRange,
  DimensionMismatch,
  EmptyMask,
  TooSmall,
  TooFewSamples,
  EmptyBatch,
  ShapeMismatch,
  StaleCache,
  InvalidSpec,
  EmptyRange,
  CountOutOfRange,
  EmptyCorpus,
  EmptyPresetList,
  WriteFailure,
  ParseError,
  MissingField,
  MissingFile,
  DivergenceDetected,
  InvalidArgument,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` tells callers which
/// contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        message_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// what() without the kind prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

}  // namespace fishrect
