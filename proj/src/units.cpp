#include "morphquad/units.hpp"

#include <array>
#include <charconv>
#include <stdexcept>
#include <string>

#include "morphquad/math.hpp"

namespace morphquad {

namespace {

struct Unit {
  std::string_view symbol;
  Dimension dim;
  double to_si;
};

constexpr std::array kUnits{
    Unit{"m", Dimension::Length, 1.0},          Unit{"cm", Dimension::Length, 1e-2},
    Unit{"mm", Dimension::Length, 1e-3},        Unit{"kg", Dimension::Mass, 1.0},
    Unit{"g", Dimension::Mass, 1e-3},           Unit{"rad", Dimension::Angle, 1.0},
    Unit{"deg", Dimension::Angle, kPi / 180.0}, Unit{"s", Dimension::Time, 1.0},
    Unit{"ms", Dimension::Time, 1e-3},          Unit{"rad/s", Dimension::AngularRate, 1.0},
    Unit{"deg/s", Dimension::AngularRate, kPi / 180.0},
    Unit{"N", Dimension::Force, 1.0},           Unit{"N*m", Dimension::Torque, 1.0},
    Unit{"Nm", Dimension::Torque, 1.0},         Unit{"N.m", Dimension::Torque, 1.0},
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string_view dimension_name(Dimension dim) {
  switch (dim) {
    case Dimension::Length: return "length";
    case Dimension::Mass: return "mass";
    case Dimension::Angle: return "angle";
    case Dimension::Time: return "time";
    case Dimension::AngularRate: return "angular rate";
    case Dimension::Force: return "force";
    case Dimension::Torque: return "torque";
    case Dimension::Dimensionless: return "dimensionless";
  }
  return "unknown";
}

double parse_quantity(std::string_view text, Dimension dim) {
  text = trim(text);
  double value = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  // Skip a leading '+', which from_chars rejects.
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr == begin) {
    throw std::invalid_argument("expected a number in '" + std::string(text) + "'");
  }
  const std::string_view unit = trim(std::string_view(ptr, static_cast<std::size_t>(end - ptr)));
  if (unit.empty()) {
    return value;
  }
  for (const Unit& u : kUnits) {
    if (u.symbol == unit) {
      if (u.dim != dim) {
        throw std::invalid_argument("unit '" + std::string(unit) + "' is not a " +
                                    std::string(dimension_name(dim)) + " unit");
      }
      return value * u.to_si;
    }
  }
  throw std::invalid_argument("unknown unit '" + std::string(unit) + "'");
}

}  // namespace morphquad
