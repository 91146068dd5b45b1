#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace morphquad {

// Argument outside the domain of a physical/model function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Euler attitude too close to gimbal lock (|theta| -> pi/2).
class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Assembled model violates an internal invariant (e.g. inertia not PD).
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Scenario file could not be parsed or failed validation. `field()` holds the
// dotted path of the offending entry when known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Simulation produced a non-finite state.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t tick, const std::string& what)
      : std::runtime_error("diverged at tick " + std::to_string(tick) + ": " + what), tick_(tick) {}

  std::size_t tick() const noexcept { return tick_; }

 private:
  std::size_t tick_;
};

}  // namespace morphquad

namespace morphquad {

// Telemetry file is unreadable, truncated, or does not match the schema.
class LogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace morphquad
