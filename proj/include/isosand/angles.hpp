#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <span>

namespace isosand {

inline constexpr double kPi = std::numbers::pi;

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  return a <= -kPi ? a + 2.0 * kPi : a;
}

/// Rotation phi such that every angle minus phi lies in the open interval
/// (-pi/2, pi/2), chosen as the midpoint of the smallest arc containing the
/// angles. Empty when the angles do not fit in an open half-plane.
std::optional<double> half_plane_centre(std::span<const double> angles);

}  // namespace isosand
