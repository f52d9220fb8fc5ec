#pragma once

#include <stdexcept>
#include <string>

namespace p2ecm {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidLevel : public Error {
 public:
  using Error::Error;
};

/// Coordinates outside a triangular layout.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// Mismatched levels, lengths or dimensions between operands.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Malformed stencil specification or weight arity mismatch.
class SpecError : public Error {
 public:
  using Error::Error;
};

/// Sparse index range exhausted by the requested width.
class OverflowError : public Error {
 public:
  using Error::Error;
};

/// Machine or fixture file could not be parsed; the message carries the line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace p2ecm
