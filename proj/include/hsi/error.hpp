#pragma once

#include <stdexcept>
#include <string>

namespace hsi {

// Base for everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller-supplied argument violates an operation's precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A file on disk is malformed or inconsistent with its header.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Reading or writing a file failed at the OS level.
class IoError : public Error {
 public:
  using Error::Error;
};

// An iterative solver stopped before reaching its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// A configuration value is missing, malformed or out of range.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace hsi
