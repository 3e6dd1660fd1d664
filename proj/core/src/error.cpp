#include "fusionnet/error.hpp"

namespace fusionnet {

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

ParseError::ParseError(std::size_t line, const std::string& message)
    : Error(ErrorKind::parse, "line " + std::to_string(line) + ": " + message),
      line_(line) {}

void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace fusionnet
