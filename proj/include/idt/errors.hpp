#pragma once

#include <stdexcept>
#include <string>

namespace idt {

/// A parameter lies outside the mathematical domain of the operation.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A caller-side precondition or structural contract was violated.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A numerical routine failed (e.g. factorization after maximal jitter).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace idt
