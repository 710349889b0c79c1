#pragma once

#include <stdexcept>
#include <string>

namespace framechange {

// Malformed input: bad arguments, inconsistent dimensions, unknown tokens.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Syntax error in the pulse-program or geometry text formats.
class ParseError : public InputError {
 public:
  ParseError(const std::string& what, int line, int column)
      : InputError("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                   what),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

// A compiler pass was handed a program at the wrong stage.
class StageError : public InputError {
 public:
  using InputError::InputError;
};

// Timing or hardware constraint violated (negative free evolution, gap below the minimum,
// infeasible Wei16 delays, off-grid phases).
class ConstraintError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical routine produced a non-finite or non-unitary result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace framechange
