#pragma once

#include <stdexcept>
#include <string>

namespace derwent {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Non-finite values, degenerate norms.
class NumericError : public Error {
 public:
  using Error::Error;
};

// A random walk or negative draw has nothing to sample from.
class SamplingError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed dataset, checkpoint or JSON input.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace derwent
