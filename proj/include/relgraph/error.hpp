#pragma once

#include <stdexcept>
#include <string>

namespace relgraph {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration values (counts, ranges, thresholds).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A forward or backward pass produced NaN or Inf.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// File carries a schema version this build does not understand.
class VersionMismatchError : public Error {
 public:
  using Error::Error;
};

/// File is readable but a record is truncated or has the wrong shape.
class MalformedRecordError : public Error {
 public:
  using Error::Error;
};

}  // namespace relgraph
