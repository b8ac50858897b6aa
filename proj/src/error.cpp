#include "saac/error.hpp"

namespace saac {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::NoBaseline: return "no-baseline";
    case ErrorKind::Unresolved: return "unresolved-county";
    case ErrorKind::Infeasible: return "structural-infeasibility";
    case ErrorKind::EmptyMonth: return "empty-month";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

ValidationError::ValidationError(std::vector<std::string> diagnostics)
    : Error(ErrorKind::Validation,
            diagnostics.empty() ? std::string("validation failed") : diagnostics.front()),
      diagnostics_(std::move(diagnostics)) {}

}  // namespace saac
