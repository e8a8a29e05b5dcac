#pragma once

#include <stdexcept>
#include <string>

namespace tabbench {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input text: table files, dataset files, space specs.
struct ParseError : Error {
  using Error::Error;
};

// Structurally well-formed input that violates a table invariant
// (wrong entry count, ragged curves, non-finite losses, ...).
struct IntegrityError : Error {
  using Error::Error;
};

}  // namespace tabbench
