#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gridskg {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (non-finite coordinate,
/// malformed cell id, degenerate polygon, bad timestamp, ...).
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

/// Textual input could not be parsed. Carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Input parsed but is internally inconsistent: dangling references,
/// missing required properties, un-normalized segments.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// Input uses a construct this library deliberately does not support
/// (blank nodes, language tags, collections).
class UnsupportedFeatureError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// Routing endpoint cell has no terminal node in the simplified network.
class NoEndpointError : public Error {
 public:
  using Error::Error;
};

/// Target cell cannot be reached from the origin cell.
class UnreachableError : public Error {
 public:
  UnreachableError(const std::string& what, std::size_t explored_cells)
      : Error(what), explored_cells_(explored_cells) {}

  std::size_t explored_cells() const noexcept { return explored_cells_; }

 private:
  std::size_t explored_cells_;
};

}  // namespace gridskg
