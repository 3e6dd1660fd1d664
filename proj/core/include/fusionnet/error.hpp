#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fusionnet {

// Error families; the CLI maps each one to a distinct exit code.
enum class ErrorKind {
  invalid_argument,
  parse,
  format,
  shape,
  io,
  not_found,
  state,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Text-format failure located at a 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message);

  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace fusionnet
