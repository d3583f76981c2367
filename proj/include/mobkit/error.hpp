#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mobkit {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed literal text. `offset()` is the byte offset into the input.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : Error(message + " at offset " + std::to_string(offset)),
        message_(message),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::string& bare_message() const noexcept { return message_; }

  /// Same error reported relative to an enclosing buffer.
  ParseError shifted(std::size_t base) const { return ParseError(message_, base + offset_); }

 private:
  std::string message_;
  std::size_t offset_;
};

/// A value violates the invariants of its type (empty set, lower > upper, ...).
class InvalidValue : public Error {
 public:
  using Error::Error;
};

/// Operands carry different spatial reference identifiers.
class SridMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace mobkit
