#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rhp {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed textual input. `location` is a 1-based column (formulas) or
/// line number (line-oriented files); 0 when unknown.
struct ParseError : Error {
  std::size_t location;
  ParseError(const std::string& what, std::size_t location_)
      : Error(what), location(location_) {}
};

struct ValidationError : Error {
  using Error::Error;
};

struct UnknownStateError : Error {
  using Error::Error;
};

/// A horizon or state-space cap was reached before the search settled.
struct BudgetExceeded : Error {
  using Error::Error;
};

/// No solution exists from the initial states.
struct Infeasible : Error {
  using Error::Error;
};

}  // namespace rhp
