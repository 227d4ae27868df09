#pragma once

#include <stdexcept>
#include <string>

namespace kimura {

/// Invalid user input: bad coefficients, out-of-range arguments, malformed configs.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to deliver its contracted accuracy.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kimura
