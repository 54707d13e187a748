#pragma once

#include <stdexcept>
#include <string>

namespace dvs {

// Base class for everything thrown by this library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid value for a physical quantity (non-positive current, zero gain, ...).
class domain_error : public error {
 public:
  using error::error;
};

// Malformed or incomplete configuration input.
class config_error : public error {
 public:
  using error::error;
};

// The model cannot represent the requested condition (instability,
// divergent spectral moments, infeasible constraint sets).
class model_error : public error {
 public:
  using error::error;
};

// Linear-algebra or integration failure (singular matrix, non-finite state).
class numerical_error : public error {
 public:
  using error::error;
};

// Result would not meet the stated accuracy (trace too short, grid too sparse).
class accuracy_error : public error {
 public:
  using error::error;
};

// A bracketed search found no solution inside its interval.
class range_error : public error {
 public:
  using error::error;
};

// An operation precondition was violated by the caller.
class precondition_error : public error {
 public:
  using error::error;
};

}  // namespace dvs
