#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scanpower {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed netlist or side file, carrying the 1-based source line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A structural invariant of a circuit does not hold.
class NetlistError : public Error {
 public:
  using Error::Error;
};

// A value outside the domain of a physical model.
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace scanpower
