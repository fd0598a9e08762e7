#include "fishrect/error.hpp"

namespace fishrect {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorKind::InvalidRotation: return "InvalidRotation";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::Inadmissible: return "Inadmissible";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EmptyMask: return "EmptyMask";
    case ErrorKind::TooSmall: return "TooSmall";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::EmptyBatch: return "EmptyBatch";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::StaleCache: return "StaleCache";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::EmptyRange: return "EmptyRange";
    case ErrorKind::CountOutOfRange: return "CountOutOfRange";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::EmptyPresetList: return "EmptyPresetList";
    case ErrorKind::WriteFailure: return "WriteFailure";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::MissingField: return "MissingField";
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::DivergenceDetected: return "DivergenceDetected";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace fishrect
