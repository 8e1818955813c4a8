#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace trackforge {

enum class ErrorKind {
  InvalidGeometry,
  InvalidParameter,
  InvalidEmbedding,
  DimensionMismatch,
  Sequencing,
  Data,
  Parse,
  Format,
  Consistency,
  Io,
  Config,
  Generation,
  Internal,
};

std::string_view to_string(ErrorKind kind);

// All library failures are reported through this exception. The kind is
// stable and machine-readable; what() carries the human detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace trackforge
