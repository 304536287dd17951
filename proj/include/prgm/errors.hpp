#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace prgm {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the admissible set (support, range of H, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative scheme (bracketing, bisection, quadrature) did not converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Invalid user input: improper prior, malformed box, bad configuration.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The family lacks structure an operation needs (e.g. no Jeffreys shift).
class UnsupportedFamilyError : public Error {
 public:
  using Error::Error;
};

/// An oracle check falsified a property it was asked to confirm.
class VerificationFailure : public Error {
 public:
  using Error::Error;
};

/// A file could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Expression or config text that failed to parse; `position` is a byte offset.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t position)
      : ValidationError(what + " (at position " + std::to_string(position) + ")"),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

using WarningHandler = std::function<void(std::string_view)>;

/// Replaces the process-wide warning sink. The default writes to stderr.
void set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

}  // namespace prgm
