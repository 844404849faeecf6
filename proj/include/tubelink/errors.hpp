#pragma once

#include <stdexcept>
#include <string>

namespace tubelink {

/// Input data violates a schema or a domain invariant (bad file, bad field).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An internal postcondition failed. Indicates a bug, not bad input.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace tubelink
