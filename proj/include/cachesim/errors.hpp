#pragma once

#include <stdexcept>

namespace cachesim {

// Invalid configuration or usage. The CLI maps this to exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unreadable or malformed trace input. The CLI maps this to exit code 2.
struct TraceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A broken internal invariant. The CLI maps this to exit code 3.
struct InvariantViolation : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace cachesim
