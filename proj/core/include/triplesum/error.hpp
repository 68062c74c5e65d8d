#pragma once

#include <stdexcept>
#include <string>

namespace triplesum {

// Malformed or inconsistent input data: parse failures, bad literals,
// vocabulary lookups that cannot succeed, triple sets outside the bounds.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor operands whose shapes do not compose.
class ShapeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Non-finite values during training or evaluation.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable, truncated or mismatched checkpoint files.
class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace triplesum
