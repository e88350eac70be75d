#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sparseout {

// Operand shapes are incompatible for the requested operation.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// p, q, eps, learning rate or another hyperparameter is outside its domain.
class HyperparameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input data violates an operation's precondition (empty, out of range, ...).
class InvalidInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An operation was called in the wrong lifecycle state, e.g. backward
// without a preceding train-mode forward.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Malformed binary input. `offset()` is the byte position of the problem.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sparseout
