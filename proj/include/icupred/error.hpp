#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace icupred {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input file; carries the 1-based line the problem was found on.
struct ParseError : Error {
  ParseError(std::size_t line_no, const std::string& what)
      : Error("line " + std::to_string(line_no) + ": " + what), line(line_no) {}
  std::size_t line;
};

// Bad configuration or out-of-range argument; the CLI maps this to exit 2.
struct ValidationError : Error {
  using Error::Error;
};

}  // namespace icupred
