#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace coalsisr {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A backward event that cannot be applied to the given configuration.
class InvalidEvent : public Error {
 public:
  using Error::Error;
};

/// A pair of configurations not connected by a single forward event.
class UnreachableTransition : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace coalsisr
