#include "isosand/angles.hpp"

#include <algorithm>
#include <vector>

namespace isosand {

std::optional<double> half_plane_centre(std::span<const double> angles) {
  if (angles.empty()) return std::nullopt;
  std::vector<double> a;
  a.reserve(angles.size());
  for (double x : angles) {
    double w = std::fmod(x, 2.0 * kPi);
    if (w < 0.0) w += 2.0 * kPi;
    a.push_back(w);
  }
  std::sort(a.begin(), a.end());
  // The arc is the complement of the widest gap between consecutive angles.
  double widest = a.front() + 2.0 * kPi - a.back();
  std::size_t start = 0;
  for (std::size_t i = 1; i < a.size(); ++i) {
    const double gap = a[i] - a[i - 1];
    if (gap > widest) {
      widest = gap;
      start = i;
    }
  }
  const double arc = 2.0 * kPi - widest;
  if (arc >= kPi - 1e-12) return std::nullopt;
  return wrap_angle(a[start] + 0.5 * arc);
}

}  // namespace isosand
