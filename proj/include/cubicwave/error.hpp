/**
 * @file error.hpp
 * @brief Error categories raised by the library.
 */
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cubicwave {

enum class ErrorKind {
  invalid_input,
  integration_failure,
  quadrature_failure,
  series_domain_error,
  bracket_failure,
  wrong_branch,
  infinite_energy,
  nonconvergence,
  spectral_failure,
  precondition_violation,
  certificate_failure,
  scan_failure,
  lemma_violation,
};

[[nodiscard]] inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid_input";
    case ErrorKind::integration_failure: return "integration_failure";
    case ErrorKind::quadrature_failure: return "quadrature_failure";
    case ErrorKind::series_domain_error: return "series_domain_error";
    case ErrorKind::bracket_failure: return "bracket_failure";
    case ErrorKind::wrong_branch: return "wrong_branch";
    case ErrorKind::infinite_energy: return "infinite_energy";
    case ErrorKind::nonconvergence: return "nonconvergence";
    case ErrorKind::spectral_failure: return "spectral_failure";
    case ErrorKind::precondition_violation: return "precondition_violation";
    case ErrorKind::certificate_failure: return "certificate_failure";
    case ErrorKind::scan_failure: return "scan_failure";
    case ErrorKind::lemma_violation: return "lemma_violation";
  }
  return "unknown";
}

/// Base exception; `kind()` identifies the failure category.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Non-finite right-hand side; carries the last state that was still finite.
class IntegrationFailure : public Error {
 public:
  IntegrationFailure(const std::string& what, double x, std::vector<double> state)
      : Error(ErrorKind::integration_failure, what), x_(x), state_(std::move(state)) {}

  [[nodiscard]] double last_x() const noexcept { return x_; }
  [[nodiscard]] const std::vector<double>& last_state() const noexcept { return state_; }

 private:
  double x_;
  std::vector<double> state_;
};

}  // namespace cubicwave
