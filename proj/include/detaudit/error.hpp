#pragma once

#include <stdexcept>
#include <string>

namespace detaudit {

// Exception hierarchy. The CLI maps these onto exit codes:
// ValidationError -> 1, IoError -> 2, anything else -> 3.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition or invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A line-oriented input could not be parsed.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Persisted file is structurally damaged.
class CorruptFileError : public IoError {
 public:
  using IoError::IoError;
};

/// Persisted file carries a format version this build cannot read.
class VersionError : public IoError {
 public:
  using IoError::IoError;
};

/// Document has too few tokens to be scored by the windowed entropy.
class TooShortError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace detaudit
