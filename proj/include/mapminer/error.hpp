#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mapminer {

// Base class for every error raised by the library. Data problems derive from
// this; programming errors (violated preconditions) raise DomainError.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& column)
      : Error("missing column '" + column + "'"), column_(column) {}
  const std::string& column() const { return column_; }

 private:
  std::string column_;
};

class EmptyLogError : public Error {
 public:
  EmptyLogError() : Error("event log is empty") {}
};

// Malformed input row. `row` is the 1-based record number in the file, the
// header being row 1.
class ParseError : public Error {
 public:
  ParseError(std::size_t row, const std::string& what)
      : Error("row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace mapminer
