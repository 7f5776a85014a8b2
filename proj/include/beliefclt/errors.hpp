#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace beliefclt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A lower or upper standard deviation is (numerically) zero, so the
// normalized sums and the correlation are undefined.
class DegenerateVariance : public Error {
 public:
  using Error::Error;
};

class GridTooLarge : public Error {
 public:
  using Error::Error;
};

class InvalidProbabilities : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, std::size_t column, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        source_(std::move(source)),
        line_(line),
        column_(column) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::string source_;
  std::size_t line_;
  std::size_t column_;
};

}  // namespace beliefclt
