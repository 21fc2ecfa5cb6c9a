#pragma once

#include <stdexcept>
#include <string>

namespace taxnet {

// Malformed or inconsistent input data. The CLI maps this to exit status 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A stage could not produce a result from valid inputs (zero variance,
// zero total value, ...). The CLI maps this to exit status 1.
class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace taxnet
