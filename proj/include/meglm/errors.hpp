#pragma once

#include <stdexcept>
#include <string>

namespace meglm {

/// Malformed user input: config, data file, or command-line options.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure failed (non-convergence, loss of definiteness).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace meglm
