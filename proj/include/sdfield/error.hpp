#pragma once

#include <stdexcept>
#include <string>

namespace sdfield {

enum class ErrorKind {
  InvalidMesh,
  InvalidResolution,
  InvalidCount,
  InvalidPose,
  DegenerateRotation,
  InvalidRotation,
  BehindCamera,
  CorrespondenceMismatch,
  DegenerateCloud,
  ShapeError,
  EmptyDataset,
  DegenerateMesh,
  EmptyCloud,
  TooLarge,
  InvalidArgument,
  ParseError,
  IoError,
  ConfigError,
  NumericFailure,
};

const char* to_string(ErrorKind kind);

// All library failures are reported as sdfield::Error; kind() is stable and
// is what the CLI maps to exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// CLI contract: 2 for I/O and parse failures, 4 for numeric failures,
// 3 for every validation error.
int exit_code(ErrorKind kind);

}  // namespace sdfield
