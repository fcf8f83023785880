#pragma once

#include <stdexcept>
#include <string>

namespace mforge {

// Caller passed a value that violates an operation's precondition.
// The CLI maps this to exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A file or data stream is missing, unreadable, or ill-formed.
// The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computation produced (or received) a non-finite value.
// The CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mforge
