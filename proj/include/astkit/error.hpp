#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace astkit {

// Base class for every data error raised by the library. Precondition
// violations on caller-supplied data (malformed files, mismatched shapes,
// invalid configuration values) throw this or a subclass.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// A malformed line in a line-oriented input document. `line()` is 1-based.
class ParseError : public Error {
  public:
    ParseError(std::size_t line, const std::string &what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

} // namespace astkit
