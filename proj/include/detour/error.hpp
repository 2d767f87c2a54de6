#pragma once

#include <stdexcept>
#include <string>

namespace detour {

// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A function argument violates its precondition.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Input file header does not match the expected column contract.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A cell could not be parsed (non-numeric, unknown enumerator, ...).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Data violates a dataset invariant (e.g. car chosen without car access).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Model specification is inconsistent with the data or with itself.
class SpecError : public Error {
 public:
  using Error::Error;
};

// Non-finite or otherwise unusable values encountered during computation.
class DataError : public Error {
 public:
  using Error::Error;
};

// Configuration file problems (unknown key, bad value).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Filesystem-level problems (missing file, unwritable output).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace detour
