#pragma once

#include <stdexcept>

namespace consort {

// Bad inputs: malformed files, invalid parameters, failed preconditions.
// The CLI maps this to exit code 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A requested computation exceeds a hard size guard (e.g. exact valuation of
// too many members). The CLI maps this to exit code 3.
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace consort
