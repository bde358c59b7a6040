#pragma once

#include <stdexcept>

namespace kinfp {

// Iterative method failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested evaluation leaves the sampled domain.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Overflow, NaN, loss of positivity or a broken invariant during a computation.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kinfp
