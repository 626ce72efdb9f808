#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gdmap {

enum class ErrorKind {
  invalid_argument,
  invalid_target,
  singular_diffusion,
  isolated_point,
  insufficient_samples,
  solver_failure,
  parse_error,
  blow_up,
  internal_error,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base error for everything the library throws.
///
/// Carries the originating module, an optional point/row/step index and a
/// remediation hint so the CLI can report a failure without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, std::string message,
        std::optional<std::size_t> index = std::nullopt, std::string hint = {});

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }
  std::optional<std::size_t> index() const noexcept { return index_; }
  const std::string& hint() const noexcept { return hint_; }

 private:
  ErrorKind kind_;
  std::string module_;
  std::optional<std::size_t> index_;
  std::string hint_;
};

/// Thrown by the eigensolvers when the iteration budget is exhausted.
class SolverFailure : public Error {
 public:
  SolverFailure(std::string module, std::string message, std::vector<double> best_residuals);

  const std::vector<double>& best_residuals() const noexcept { return residuals_; }

 private:
  std::vector<double> residuals_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& module, const std::string& message,
                       std::optional<std::size_t> index = std::nullopt, const std::string& hint = {});

}  // namespace gdmap
