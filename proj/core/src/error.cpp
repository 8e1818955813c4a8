#include "trackforge/error.hpp"

namespace trackforge {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidGeometry: return "invalid-geometry";
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::InvalidEmbedding: return "invalid-embedding";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::Sequencing: return "sequencing";
    case ErrorKind::Data: return "data";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Format: return "format";
    case ErrorKind::Consistency: return "consistency";
    case ErrorKind::Io: return "io";
    case ErrorKind::Config: return "config";
    case ErrorKind::Generation: return "generation";
    case ErrorKind::Internal: return "internal";
  }
  return "unknown";
}

}  // namespace trackforge
