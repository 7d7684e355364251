#pragma once

#include <stdexcept>
#include <string>

namespace bregtree {

// Bad arguments: dimension mismatches, empty inputs, out-of-range knobs.
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

// A parameter sits on (or outside) the boundary of its family's domain,
// e.g. a singular covariance or a zero word probability. The message names
// the offending component.
class DegenerateParameterError : public std::domain_error {
 public:
  explicit DegenerateParameterError(const std::string& what)
      : std::domain_error(what) {}
};

// Operation not available for this model (e.g. no closed-form conjugate).
class UnsupportedOperationError : public std::logic_error {
 public:
  explicit UnsupportedOperationError(const std::string& what)
      : std::logic_error(what) {}
};

// Malformed input file; carries a 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, long line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

// A metric that is undefined for the given inputs (e.g. dendrogram purity
// with no same-label pair).
class UndefinedMetricError : public std::runtime_error {
 public:
  explicit UndefinedMetricError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace bregtree
