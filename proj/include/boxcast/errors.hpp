#pragma once

#include <stdexcept>
#include <string>

namespace boxcast {

/// Bad arguments or option values; detected before any computation runs.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent input data (CSV structure, non-positive rates).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine failed (decomposition, optimizer, inverse transform domain).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace boxcast
