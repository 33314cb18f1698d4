#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace auxmi {

/// Base of every error raised by the library. `kind()` is a stable
/// machine-readable tag used by the CLI error output.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

/// Malformed input data: CSV parse failures, unknown variables, bad codes.
class DataError : public Error {
 public:
  explicit DataError(const std::string& message) : Error("data_error", message) {}
};

/// Invalid configuration or precondition violation by the caller.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("config_error", message) {}
};

/// A model could not be fitted (rank deficiency, non-convergence, ...).
class FitError : public Error {
 public:
  explicit FitError(const std::string& message, std::string kind = "fit_error")
      : Error(std::move(kind), message) {}
};

/// Perfect prediction surfaced by the imputation engine under policy=error.
class SeparationError : public FitError {
 public:
  SeparationError(std::string variable, std::vector<std::string> predictors);

  const std::string& variable() const noexcept { return variable_; }
  const std::vector<std::string>& predictors() const noexcept { return predictors_; }

 private:
  std::string variable_;
  std::vector<std::string> predictors_;
};

}  // namespace auxmi
