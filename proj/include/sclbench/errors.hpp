#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sclbench {

// Invalid arguments are reported with std::invalid_argument throughout.
// The types below cover the remaining error kinds.

/// A metric that has no value for its input (empty confusion, N < 2 for BWT, ...).
class UndefinedMetric : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Non-finite values reached an optimizer.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Estimate requested from a detector that has seen no data.
class EmptyWindow : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed input file; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed input whose shape is inconsistent (feature dimension, missing split, ...).
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid experiment configuration; names the offending key and line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, std::size_t line, const std::string& what)
      : std::runtime_error(key + (line ? " (line " + std::to_string(line) + ")" : std::string()) +
                           ": " + what),
        key_(std::move(key)),
        line_(line) {}
  const std::string& key() const noexcept { return key_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string key_;
  std::size_t line_;
};

}  // namespace sclbench
