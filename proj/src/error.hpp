#pragma once

#include <stdexcept>
#include <string>

namespace abslab {

// Error taxonomy shared by the C++ core and the C API / CLI exit codes:
// usage/config -> 1, data -> 2, numeric -> 3, io -> 2 at the CLI.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration or unusable arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (corpora, checkpoints, alignment).
class DataError : public Error {
 public:
  using Error::Error;
};

// Tensor shape disagreements. Treated as a data problem at the CLI boundary
// since they arise from checkpoint/config mismatches.
class DimensionError : public DataError {
 public:
  using DataError::DataError;
};

// NaN/Inf inputs, diverged losses, invalid numeric domains.
class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace abslab
