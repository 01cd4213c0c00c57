#pragma once

#include <stdexcept>
#include <string>

namespace fairsvdd {

// Error categories map 1:1 onto CLI exit codes (see tools/).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input data: CSV parse failures, invariant violations, shape mismatches.
struct DataError : Error {
  using Error::Error;
};

// Training produced a non-finite loss; we abort instead of clamping.
struct NumericError : Error {
  using Error::Error;
};

// Filesystem failures.
struct IoError : Error {
  using Error::Error;
};

// Invalid configuration values (bad hyperparameters, unknown keys).
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace fairsvdd
