#pragma once

#include <stdexcept>
#include <string>

namespace shotlgcp {

// Base for every error raised by the library. The CLI maps subclasses to
// exit codes (see commands.hpp).
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Out-of-domain model or sampler parameter (non-positive a, b, step size...).
class ParameterError : public Error {
public:
  using Error::Error;
};

// Vector or matrix sizes that do not agree (covariate length, basis size).
class DimensionError : public Error {
public:
  using Error::Error;
};

// Non-finite coordinates or otherwise unusable numeric input.
class InputError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

// Malformed or inconsistent data files.
class DataError : public Error {
public:
  using Error::Error;
};

// Divergence, envelope violation, non-finite sampler state.
class NumericalError : public Error {
public:
  using Error::Error;
};

} // namespace shotlgcp
