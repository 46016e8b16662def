#include "sdfield/error.hpp"

namespace sdfield {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidMesh: return "InvalidMesh";
    case ErrorKind::InvalidResolution: return "InvalidResolution";
    case ErrorKind::InvalidCount: return "InvalidCount";
    case ErrorKind::InvalidPose: return "InvalidPose";
    case ErrorKind::DegenerateRotation: return "DegenerateRotation";
    case ErrorKind::InvalidRotation: return "InvalidRotation";
    case ErrorKind::BehindCamera: return "BehindCamera";
    case ErrorKind::CorrespondenceMismatch: return "CorrespondenceMismatch";
    case ErrorKind::DegenerateCloud: return "DegenerateCloud";
    case ErrorKind::ShapeError: return "ShapeError";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::DegenerateMesh: return "DegenerateMesh";
    case ErrorKind::EmptyCloud: return "EmptyCloud";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::NumericFailure: return "NumericFailure";
  }
  return "Unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError:
    case ErrorKind::IoError:
      return 2;
    case ErrorKind::NumericFailure:
      return 4;
    default:
      return 3;
  }
}

}  // namespace sdfield
