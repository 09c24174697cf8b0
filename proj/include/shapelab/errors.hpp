#pragma once

#include <stdexcept>
#include <string>

namespace shapelab {

// Base class for all library errors. Subclasses map onto distinct CLI
// exit codes (see tools/main.cpp).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid shapes passed to a tensor operation.
struct DimensionError : Error {
  using Error::Error;
};

// Label or index outside its valid range.
struct IndexError : Error {
  using Error::Error;
};

// Invalid parameter values (rates, coefficients, spec fields).
struct ConfigError : Error {
  using Error::Error;
};

// Invalid argument to a query or probe (empty list, out-of-range count).
struct ArgumentError : Error {
  using Error::Error;
};

// Requested dataset cannot exist under the uniqueness rule.
struct InfeasibleError : Error {
  using Error::Error;
};

// Operation called with required state missing (e.g. optimizer step
// before gradients are populated).
struct StateError : Error {
  using Error::Error;
};

// Training produced a non-finite loss.
struct DivergenceError : Error {
  int epoch = -1;
  int batch = -1;
  DivergenceError(const std::string& msg, int epoch_, int batch_)
      : Error(msg), epoch(epoch_), batch(batch_) {}
};

// Filesystem failures.
struct IoError : Error {
  using Error::Error;
};

}  // namespace shapelab
