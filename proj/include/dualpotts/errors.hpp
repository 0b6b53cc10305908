#pragma once

#include <stdexcept>
#include <string>

namespace dualpotts {

/// Caller supplied a value outside a documented domain (dimension, alphabet,
/// negative coupling, malformed tree, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed JSON input.
class ParseError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// An exact enumeration would exceed the configured term budget.
class GuardExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation is not defined for this model (e.g. uniform sampling with a field).
class Unsupported : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Broken internal invariant. Never a user error.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace dualpotts
