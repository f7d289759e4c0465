#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dunkl {

enum class ErrorKind {
  invalid_dimension,
  not_a_root_system,
  invalid_multiplicity,
  unknown_root,
  group_generation_failure,
  on_wall,
  exactness_unavailable,
  gradient_required,
  evaluation_error,
  non_convergence,
  invalid_start,
  unsupported,
  insufficient_chains,
  degenerate_function,
  degenerate_basis,
  search_exhausted,
  hypothesis_violation,
  out_of_range,
  invalid_argument,
  config_error,
  io_error,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_dimension: return "invalid-dimension";
    case ErrorKind::not_a_root_system: return "not-a-root-system";
    case ErrorKind::invalid_multiplicity: return "invalid-multiplicity";
    case ErrorKind::unknown_root: return "unknown-root";
    case ErrorKind::group_generation_failure: return "group-generation-failure";
    case ErrorKind::on_wall: return "on-wall";
    case ErrorKind::exactness_unavailable: return "exactness-unavailable";
    case ErrorKind::gradient_required: return "gradient-required";
    case ErrorKind::evaluation_error: return "evaluation-error";
    case ErrorKind::non_convergence: return "non-convergence";
    case ErrorKind::invalid_start: return "invalid-start";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::insufficient_chains: return "insufficient-chains";
    case ErrorKind::degenerate_function: return "degenerate-function";
    case ErrorKind::degenerate_basis: return "degenerate-basis";
    case ErrorKind::search_exhausted: return "search-exhausted";
    case ErrorKind::hypothesis_violation: return "hypothesis-violation";
    case ErrorKind::out_of_range: return "out-of-range";
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::config_error: return "config-error";
    case ErrorKind::io_error: return "io-error";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace dunkl
