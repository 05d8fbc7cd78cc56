#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace cavbec {

/// Root of every error the library throws. The CLI maps the three
/// families below onto exit codes 1 (config), 2 (numerical), 3 (validation).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A parameter violates a type invariant; `field()` names it.
class InvalidParameter : public ConfigError {
 public:
  InvalidParameter(std::string field, const std::string& what)
      : ConfigError(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// E.g. Lyapunov requested with a frequency-dependent bath.
class UnsupportedCombination : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class SingularConfiguration : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// (-i w I - K) is numerically singular at `omega()`.
class ResonanceSingularity : public NumericalError {
 public:
  explicit ResonanceSingularity(double omega);
  double omega() const { return omega_; }

 private:
  double omega_;
};

class NoSteadyState : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DivergentVariance : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class StepSizeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Closed-form consistency failed; `worst_omega()` is where the spread peaked.
class ModelMismatch : public NumericalError {
 public:
  ModelMismatch(const std::string& what, double worst_omega)
      : NumericalError(what), worst_omega_(worst_omega) {}
  double worst_omega() const { return worst_omega_; }

 private:
  double worst_omega_;
};

/// Something that cannot happen did. Always a bug.
class InternalError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ValidationFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace cavbec
