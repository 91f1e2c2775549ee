#pragma once

#include <stdexcept>
#include <string>

namespace melnikov3d {

/// Invalid argument or configuration (maps to CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input outside the mathematical domain of an operation.
class DomainError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class PoleSingularity : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Numerical failure: divergence, non-convergence, degeneracy
/// (maps to CLI exit code 3).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IntegrationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class QuadratureError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonHyperbolicError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class FoliationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace melnikov3d
