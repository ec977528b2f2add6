#pragma once

#include <stdexcept>

namespace vsl {

// Bad or contradictory configuration (exit code 2 at the CLI).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unreadable or malformed input data (exit code 3 at the CLI).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numeric divergence during training (exit code 4 at the CLI).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace vsl
