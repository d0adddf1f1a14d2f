#pragma once

#include <stdexcept>
#include <string>

namespace spfactor {

// Bad user input: malformed files, inconsistent dimensions, invalid config.
// The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Failure while running: non-finite densities, factorization failure, I/O.
// The CLI maps this to exit code 2.
class ComputeError : public std::runtime_error {
 public:
  explicit ComputeError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace spfactor
