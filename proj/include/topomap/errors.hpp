#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace topomap {

// Missing or unreadable input file.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input content that does not match its declared format.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// SchemaError tied to a 1-based line (or row) number of the offending input.
class ParseError : public SchemaError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : SchemaError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A computed result violated one of its own invariants.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace topomap
