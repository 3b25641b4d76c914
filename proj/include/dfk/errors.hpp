#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dfk {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad user input: malformed config, inconsistent dimensions, unknown keys.
struct ConfigError : Error {
  using Error::Error;
};

// File could not be read/written or has a malformed format.
struct IoError : Error {
  using Error::Error;
};

// A simulated state left the finite range (NaN/Inf or norm blow-up).
struct DivergenceError : Error {
  std::size_t step;
  DivergenceError(const std::string& what, std::size_t at)
      : Error(what), step(at) {}
};

// The design program admits no coefficient vector under the given bounds.
struct InfeasibleError : Error {
  double phase1_objective;  // residual infeasibility certificate value
  InfeasibleError(const std::string& what, double theta)
      : Error(what), phase1_objective(theta) {}
};

}  // namespace dfk
