#include "qerisk/error.hpp"

namespace qerisk {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::SolverFailure: return "bsde.solver_failure";
    case ErrorCode::EstimatorFailure: return "estimator_failure";
    case ErrorCode::SignedDensityFailure: return "measure.signed_density";
    case ErrorCode::RootFailure: return "risk.root_failure";
    case ErrorCode::UnsupportedPayoff: return "malliavin.unsupported_payoff";
    case ErrorCode::Misuse: return "misuse";
    case ErrorCode::ParseError: return "config.parse_error";
    case ErrorCode::ValidationError: return "config.validation_error";
    case ErrorCode::IoError: return "report.io_error";
  }
  return "unknown";
}

}  // namespace qerisk
