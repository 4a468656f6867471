#pragma once

#include <stdexcept>
#include <string>

namespace emofuse {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Malformed taxonomy / data / config text.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Invalid training configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Unusable dataset (CLI exit code 3).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Model file disagrees with the config or data it is used with (CLI exit code 4).
class ModelMismatchError : public Error {
 public:
  using Error::Error;
};

}  // namespace emofuse
