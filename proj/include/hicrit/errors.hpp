#pragma once

#include <stdexcept>
#include <string>

namespace hicrit {

/// Raised when an argument violates an operation's precondition.
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised by file ingestion; the message names the offending row/column.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Critical-value lookup under a cache-only policy found no usable entry.
class CacheMiss : public std::runtime_error {
 public:
  explicit CacheMiss(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hicrit
