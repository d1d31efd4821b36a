#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hjtlt {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad input: malformed formula text, inconsistent scenario, mismatched
// dimensions, out-of-range queries.
struct ValidationError : Error {
  using Error::Error;
};

// Formula text rejected; `position` is a 0-based character offset.
struct ParseError : ValidationError {
  ParseError(const std::string& what, std::size_t position)
      : ValidationError(what + " (at position " + std::to_string(position) + ")"),
        position(position) {}
  std::size_t position;
};

// Numerical failure inside a PDE solve (non-finite values, bad CFL setup).
struct SolverError : Error {
  using Error::Error;
};

// A well-formed query that has no answer: state outside the root set,
// empty control set after compression, pruning that removes every branch.
struct InfeasibleError : Error {
  using Error::Error;
};

}  // namespace hjtlt
