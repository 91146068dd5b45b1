#pragma once

#include <string>
#include <string_view>

namespace morphquad {

enum class Dimension { Length, Mass, Angle, Time, AngularRate, Force, Torque, Dimensionless };

/// Parses "12.2 cm", "77 g", "50 deg", "200 deg/s", ... into SI units. A bare
/// number is taken to be in SI already (radians for angles).
double parse_quantity(std::string_view text, Dimension dim);

std::string_view dimension_name(Dimension dim);

}  // namespace morphquad
