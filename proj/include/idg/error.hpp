#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace idg {

// Base for every domain error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on an argument was violated (bad index, terminal state, ...).
class RejectedInput : public Error {
 public:
  using Error::Error;
};

// Syntax error in an instance, log, or table document. Line and column are
// 1-based; column 0 means "whole line".
class ParseError : public RejectedInput {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : RejectedInput("line " + std::to_string(line) + ", column " +
                      std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// An exhaustive check was asked to run beyond its configured size guard.
class GuardExceeded : public RejectedInput {
 public:
  using RejectedInput::RejectedInput;
};

// Random instance generation ran out of attempts.
class GenerationFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace idg
