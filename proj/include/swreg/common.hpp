#pragma once

#include <stdexcept>

namespace swreg {

/// Malformed input: bad file contents, shape mismatches, out-of-range indices,
/// arguments outside a routine's contract.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine failed: solver did not converge, optimality certificate
/// violated, or a computed quantity is not finite.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace swreg
