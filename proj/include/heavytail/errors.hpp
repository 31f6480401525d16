#pragma once

#include <stdexcept>
#include <string>

namespace ht {

// Iterative computation ran out of its term or iteration budget.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double partial_value)
      : std::runtime_error(what), partial_value_(partial_value) {}
  double partial_value() const noexcept { return partial_value_; }

 private:
  double partial_value_;
};

class NumericalSingularity : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ResourceLimit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BracketFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two independent routes to the same quantity disagree beyond tolerance.
class DiagnosticsError : public std::runtime_error {
 public:
  DiagnosticsError(const std::string& what, double primary, double secondary)
      : std::runtime_error(what), primary_(primary), secondary_(secondary) {}
  double primary() const noexcept { return primary_; }
  double secondary() const noexcept { return secondary_; }

 private:
  double primary_;
  double secondary_;
};

class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line, std::string field)
      : std::runtime_error(what), line_(line), field_(std::move(field)) {}
  int line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  int line_;
  std::string field_;
};

}  // namespace ht
