#pragma once

#include <stdexcept>
#include <string>

namespace tflow {

// Unreadable or unusable input data.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters (non-positive radius, empty seed set, bad flags).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A structural invariant was violated; indicates a bug, not bad input.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace tflow
