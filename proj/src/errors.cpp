#include "gdmap/errors.hpp"

#include <fmt/format.h>

namespace gdmap {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::invalid_target: return "invalid-target";
    case ErrorKind::singular_diffusion: return "singular-diffusion";
    case ErrorKind::isolated_point: return "isolated-point";
    case ErrorKind::insufficient_samples: return "insufficient-samples";
    case ErrorKind::solver_failure: return "solver-failure";
    case ErrorKind::parse_error: return "parse-error";
    case ErrorKind::blow_up: return "blow-up";
    case ErrorKind::internal_error: return "internal-error";
  }
  return "unknown";
}

namespace {

std::string compose(ErrorKind kind, const std::string& module, const std::string& message,
                    std::optional<std::size_t> index, const std::string& hint) {
  std::string out = fmt::format("[{}] {}: {}", module, to_string(kind), message);
  if (index) out += fmt::format(" (index {})", *index);
  if (!hint.empty()) out += fmt::format("; hint: {}", hint);
  return out;
}

}  // namespace

Error::Error(ErrorKind kind, std::string module, std::string message,
             std::optional<std::size_t> index, std::string hint)
    : std::runtime_error(compose(kind, module, message, index, hint)),
      kind_(kind),
      module_(std::move(module)),
      index_(index),
      hint_(std::move(hint)) {}

SolverFailure::SolverFailure(std::string module, std::string message,
                             std::vector<double> best_residuals)
    : Error(ErrorKind::solver_failure, std::move(module), std::move(message), std::nullopt,
            "increase the iteration budget or the Krylov subspace size"),
      residuals_(std::move(best_residuals)) {}

void fail(ErrorKind kind, const std::string& module, const std::string& message,
          std::optional<std::size_t> index, const std::string& hint) {
  throw Error(kind, module, message, index, hint);
}

}  // namespace gdmap
