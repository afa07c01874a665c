#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dhisq {

// Diagnostic category; the CLI maps each category to its own exit code.
enum class ErrorKind {
  kSyntax = 2,
  kConfig = 3,
  kEncoding = 4,
  kRuntime = 5,
  kDeadlock = 6,
  kCompile = 7,
  kIo = 8,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Assembly / IR syntax error with a 1-based source position.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t line, std::size_t column, const std::string& msg);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace dhisq
