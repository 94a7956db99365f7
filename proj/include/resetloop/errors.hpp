#pragma once

#include <stdexcept>
#include <string>

namespace resetloop {

// Malformed input: bad files, violated preconditions, out-of-range parameters.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Singular matrices, diverging simulations, non-settling oracles.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace resetloop
