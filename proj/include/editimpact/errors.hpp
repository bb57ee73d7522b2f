#pragma once

#include <stdexcept>
#include <string>

namespace editimpact {

// Malformed or inconsistent input data (bad files, violated invariants).
// The CLI maps this family to exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Remote backend failures (network, HTTP status, malformed responses).
// The CLI maps this family to exit code 3.
class BackendError : public std::runtime_error {
 public:
  explicit BackendError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace editimpact
