#pragma once

#include <stdexcept>
#include <string>

namespace greyshill {

// Bad input data: malformed files, out-of-scale ratings, infeasible attack
// parameters. The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace greyshill
