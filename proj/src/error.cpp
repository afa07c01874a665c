#include "dhisq/error.hpp"

namespace dhisq {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kSyntax: return "syntax";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kEncoding: return "encoding";
    case ErrorKind::kRuntime: return "runtime";
    case ErrorKind::kDeadlock: return "deadlock";
    case ErrorKind::kCompile: return "compile";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

SyntaxError::SyntaxError(std::size_t line, std::size_t column, const std::string& msg)
    : Error(ErrorKind::kSyntax,
            std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
      line_(line),
      column_(column) {}

}  // namespace dhisq
