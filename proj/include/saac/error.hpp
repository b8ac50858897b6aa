#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace saac {

enum class ErrorKind {
  InvalidArgument,
  Validation,   // malformed input tables
  NoBaseline,   // school lacks semester baselines
  Unresolved,   // OSF table cannot be completed
  Infeasible,   // IPF structural infeasibility
  EmptyMonth,   // marginals with zero grand total
  Shape,        // component grids disagree
  Config,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// A validation failure carrying one diagnostic per offending row.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> diagnostics);

  const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool condition, const std::string& what) {
  if (!condition) throw Error(ErrorKind::InvalidArgument, what);
}

}  // namespace saac
