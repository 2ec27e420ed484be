#pragma once

#include <stdexcept>
#include <string>

namespace iidgan {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A precondition on argument values was violated.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A NaN or infinity appeared where finite values are required. During
/// training this signals divergence.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Invalid or unreadable experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A checkpoint document failed schema validation or could not be read.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

}  // namespace iidgan
