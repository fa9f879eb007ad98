#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gsindy {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed input text. `line()` is 1-based; 0 means unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A day whose channels cannot be placed on the grid under the fill policy.
class IncompleteDayError : public Error {
 public:
  using Error::Error;
};

/// Every candidate term was thresholded away.
class EmptyModelError : public Error {
 public:
  using Error::Error;
};

/// The pipeline cannot produce any result (no usable days, every fit failed, ...).
class PipelineError : public Error {
 public:
  using Error::Error;
};

}  // namespace gsindy
