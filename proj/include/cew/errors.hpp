#pragma once

#include <stdexcept>
#include <string>

namespace cew {

// Bad user input: malformed config, out-of-range parameters, inconsistent dims.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical routine could not deliver the requested accuracy or hit a
// degenerate matrix.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A runtime invariant was violated (norm bounds, monotone step sizes, ...).
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace cew
