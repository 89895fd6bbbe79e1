// Exception types shared by the pgeig headers.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pgeig {

/// Invalid argument value (zero vector, gamma out of range, bad interval, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A matrix failed validation when building a pencil or preconditioner.
class ConstructionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A required precondition on composite inputs is not met.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Projection basis is numerically rank deficient.
class DegenerateSubspaceError : public std::runtime_error {
 public:
  DegenerateSubspaceError(std::size_t rank, std::size_t requested)
      : std::runtime_error("degenerate subspace: rank " + std::to_string(rank) + " of " +
                           std::to_string(requested) + " requested directions"),
        rank_(rank) {}

  std::size_t rank() const noexcept { return rank_; }

 private:
  std::size_t rank_;
};

/// Matrix Market input could not be parsed; line() is 1-based (0 = file level).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

  /// The same error with the source name prefixed to the message.
  ParseError in_source(const std::string& source) const { return ParseError(source + ": " + what(), line_); }

 private:
  ParseError(const std::string& message, std::size_t line) : std::runtime_error(message), line_(line) {}

  std::size_t line_;
};

/// Overflow or NaN encountered while iterating.
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pgeig
