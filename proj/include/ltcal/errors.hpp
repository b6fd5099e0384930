#pragma once

#include <stdexcept>
#include <string>

namespace ltcal {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Rejected values, malformed files, out-of-range parameters.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// Filesystem or stream failure; the message carries the path.
class IoError : public Error {
 public:
  using Error::Error;
};

// Optimizer could not produce a usable fit; the message carries diagnostics.
class FitError : public Error {
 public:
  using Error::Error;
};

// Model and data disagree on dimensionality.
class DimensionError : public Error {
 public:
  using Error::Error;
};

}  // namespace ltcal
