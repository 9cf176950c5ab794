#pragma once

#include <stdexcept>
#include <string>

namespace irtbench {

// Raised for malformed or inconsistent user-supplied data (CSV/JSON files,
// out-of-range configuration values). Maps to CLI exit code 2.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when a numerical procedure fails (sampler initialization, optimizer
// breakdown, degenerate posteriors). Maps to CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace irtbench
