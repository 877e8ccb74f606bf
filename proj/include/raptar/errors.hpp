#pragma once

#include <stdexcept>
#include <string>

namespace raptar {

// Base for everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad configuration, bad arguments, violated preconditions. CLI exit code 1.
struct ValidationError : Error {
  using Error::Error;
};

struct EmptyGridError : ValidationError {
  using ValidationError::ValidationError;
};

struct DuplicateNameError : ValidationError {
  using ValidationError::ValidationError;
};

struct JointLimitError : ValidationError {
  using ValidationError::ValidationError;
};

struct KeyMismatchError : ValidationError {
  using ValidationError::ValidationError;
};

struct DegenerateGeometryError : ValidationError {
  using ValidationError::ValidationError;
};

struct OutOfTableRangeError : ValidationError {
  using ValidationError::ValidationError;
};

// Runtime failures. CLI exit code 2.
struct IoError : Error {
  using Error::Error;
};

struct UnreachableError : Error {
  using Error::Error;
};

struct ProtocolError : Error {
  using Error::Error;
};

struct ConnectionLostError : Error {
  using Error::Error;
};

struct ValidationExhaustedError : Error {
  using Error::Error;
};

}  // namespace raptar
