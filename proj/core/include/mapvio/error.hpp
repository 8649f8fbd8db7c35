#pragma once

#include <stdexcept>
#include <string>

namespace mapvio {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad dimension, non-unit
/// quaternion, out-of-range parameter, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Lie logarithm requested for a rotation whose angle is too close to pi.
class DegenerateLog : public Error {
 public:
  using Error::Error;
};

/// A numerical routine could not produce a trustworthy answer.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed or incompatible file contents.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace mapvio
