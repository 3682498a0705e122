#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cmc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::string message, int line, int column, std::vector<std::string> expected)
      : Error(format(message, line, column, expected)),
        line_(line),
        column_(column),
        expected_(std::move(expected)) {}

  int line() const { return line_; }
  int column() const { return column_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  static std::string format(const std::string& message, int line, int column,
                            const std::vector<std::string>& expected) {
    std::string out = std::to_string(line) + ":" + std::to_string(column) + ": " + message;
    if (!expected.empty()) {
      out += " (expected ";
      for (std::size_t i = 0; i < expected.size(); ++i) {
        if (i) out += ", ";
        out += expected[i];
      }
      out += ")";
    }
    return out;
  }

  int line_;
  int column_;
  std::vector<std::string> expected_;
};

// Duplicate, unbound or arity-mismatched constant definitions.
class DefinitionError : public Error {
 public:
  using Error::Error;
};

// A value whose shape cannot occupy the substitution site.
class TypeMismatch : public Error {
 public:
  using Error::Error;
};

// Constant unfolding or step budget exhausted.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace cmc
