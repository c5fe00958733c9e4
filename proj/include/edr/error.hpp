#pragma once

#include <stdexcept>
#include <string>

namespace edr {

// Malformed or insufficient input (shapes, lengths, rates, files).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input is well-formed but the data cannot support the computation
// (no usable beats, disconnected graphs, zero variance, solver failure).
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace edr
