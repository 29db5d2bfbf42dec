#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tcsnn {

/// Invalid argument or configuration value passed to a library call.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed text input (event files, network descriptions, configs).
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Operation not valid in the current state (e.g. ratio change mid-example).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// File could not be written (unwritable path or directory, full disk).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tcsnn
