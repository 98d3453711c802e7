#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qerisk {

enum class ErrorCode {
  InvalidArgument,
  SolverFailure,
  EstimatorFailure,
  SignedDensityFailure,
  RootFailure,
  UnsupportedPayoff,
  Misuse,
  ParseError,
  ValidationError,
  IoError,
};

/// Short, stable identifier for an error code ("bsde.solver_failure", ...).
std::string_view error_code_name(ErrorCode code) noexcept;

/// Every failure raised by the library carries a machine-readable code so
/// front ends can map it to exit statuses without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Solver failures additionally record the backward step that broke.
class SolverError : public Error {
 public:
  SolverError(std::size_t step, const std::string& message)
      : Error(ErrorCode::SolverFailure, message), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) throw Error(ErrorCode::InvalidArgument, message);
}

}  // namespace qerisk
