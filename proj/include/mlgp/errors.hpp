#pragma once

#include <stdexcept>
#include <string>

namespace mlgp {

/// Bad arguments or malformed inputs (shape mismatches, empty grids, n < 2, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A Cholesky factorization failed, even after the jitter ladder.
/// The message names the matrix (and the block step, where applicable).
class NotPositiveDefinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A triangular solve produced non-finite entries.
class Overflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mlgp
