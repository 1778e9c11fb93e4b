#pragma once

#include <stdexcept>
#include <string>

namespace camlight {

// Base of every error the library throws. The CLI maps the subclasses onto
// process exit codes (validation -> 1, I/O and parse -> 2).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes or resolutions of paired inputs disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A value violates a documented precondition or range.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed text or binary document. `where` is a line:column pair for syntax
// errors or a JSON pointer for field errors.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::string where)
      : Error(where.empty() ? message : where + ": " + message), where_(std::move(where)) {}
  explicit ParseError(const std::string& message) : ParseError(message, "") {}

  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace camlight
