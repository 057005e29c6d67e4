#pragma once

#include <stdexcept>
#include <string>

namespace disc {

/// Malformed or out-of-range user input (bad files, bad parameters,
/// dimension mismatches). The CLI maps this to exit code 3.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Internal failure that indicates a bug or numerical breakdown, e.g. the
/// SDP solver failing on a spec that is provably feasible. Exit code 4.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace disc
