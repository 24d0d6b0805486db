#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fpcsa {

// Caller passed arguments that violate an operation's contract.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Object cannot be constructed with the requested parameters.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Numeric argument outside the mathematical domain of the function.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Malformed serialized input. `offset` is the byte offset (binary input) or
// line number (text input) where parsing failed.
struct FormatError : std::runtime_error {
  FormatError(const std::string& what, size_t offset_)
      : std::runtime_error(what + " (at offset " + std::to_string(offset_) + ")"),
        offset(offset_) {}
  size_t offset;
};

// Request exceeds a hard resource budget and was refused.
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fpcsa
