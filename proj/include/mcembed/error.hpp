#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mcembed {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by every text-format reader. The line number is 1-based; 0 means
// the error is not tied to a particular line (e.g. missing rows at EOF).
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace mcembed
