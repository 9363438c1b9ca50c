#pragma once

#include <stdexcept>
#include <string>

namespace costorch {

// Base of every error the library throws. Infeasibility and LP status are
// reported as values, never through this hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownChoice : public Error {
 public:
  using Error::Error;
};

class MalformedLp : public Error {
 public:
  using Error::Error;
};

class InconsistentIncumbent : public Error {
 public:
  using Error::Error;
};

class MissingFeature : public Error {
 public:
  explicit MissingFeature(std::string field)
      : Error("missing feature: " + field), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class ArityMismatch : public Error {
 public:
  using Error::Error;
};

class DegenerateDesign : public Error {
 public:
  using Error::Error;
};

class TooFewSamples : public Error {
 public:
  using Error::Error;
};

class TooLarge : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::string message, std::size_t line)
      : Error("parse error at line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class SchemaError : public Error {
 public:
  SchemaError(std::string field, const std::string& reason)
      : Error("schema error at " + field + ": " + reason), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class BadEnum : public Error {
 public:
  BadEnum(std::string value, std::size_t row)
      : Error("bad enum value '" + value + "' at row " + std::to_string(row)),
        value_(std::move(value)),
        row_(row) {}
  const std::string& value() const noexcept { return value_; }
  std::size_t row() const noexcept { return row_; }

 private:
  std::string value_;
  std::size_t row_;
};

// Orchestration metric preconditions.
class ZeroElapsed : public Error {
 public:
  ZeroElapsed() : Error("elapsed time must be positive") {}
};

class ZeroTotal : public Error {
 public:
  ZeroTotal() : Error("total request count must be positive") {}
};

class Overcount : public Error {
 public:
  Overcount() : Error("successes + recovered exceeds total requests") {}
};

class ZeroInitialCost : public Error {
 public:
  ZeroInitialCost() : Error("initial cost must be positive") {}
};

}  // namespace costorch
