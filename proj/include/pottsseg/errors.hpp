#pragma once

#include <stdexcept>
#include <string>

namespace pottsseg {

// Bad arguments or malformed data handed to a library operation.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Integer arithmetic that would exceed the supported width.
class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

// File could not be read, written or decoded.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Text input (CSV, grid specs) that could not be parsed.
class ParseError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

// An internal consistency check failed; indicates a bug.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace pottsseg
