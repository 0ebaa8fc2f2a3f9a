#pragma once

#include <stdexcept>
#include <string>

namespace bornagain {

// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent user input: bad JSON/CSV, ensembles violating
// their invariants, dimension mismatches.
class InputError : public Error {
 public:
  using Error::Error;
};

// A configured cap (cell enumeration, memo entries) would be exceeded.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Internal state disagrees with itself, e.g. a tree threshold that is not a
// split level of the universe, or a memo that cannot reproduce its optimum.
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace bornagain
