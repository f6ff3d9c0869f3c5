#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "isosand/angles.hpp"
#include "isosand/errors.hpp"
#include "isosand/isograph.hpp"

namespace isosand {

IsoradialGraph build_multigrid_tiling(int d, std::span<const double> offsets,
                                      double radius) {
  if (d < 2) throw DomainError("multigrid needs d >= 2");
  if (static_cast<int>(offsets.size()) != d) {
    throw DomainError("multigrid needs exactly d offsets, got " +
                      std::to_string(offsets.size()));
  }
  if (!(radius > 0.0)) throw DomainError("multigrid radius must be positive");

  std::vector<Point> e(d);
  std::vector<double> palette(d);
  for (int j = 0; j < d; ++j) {
    palette[j] = kPi * j / d;
    e[j] = std::polar(1.0, palette[j]);
  }
  // A grid point z lands on the tile vertex near (d/2) z + c0, off by at most
  // d/2 in the plane; Rg covers the requested disc with room to spare.
  Point c0 = 0.0;
  for (int j = 0; j < d; ++j) c0 += (offsets[j] + 0.5) * e[j];
  const double grid_radius = 2.0 * (radius + d + 2.0) / d + 1.0;

  RhombicPatch patch;
  patch.palette = palette;
  std::map<std::vector<int>, int> index;
  auto vertex_of = [&](const std::vector<int>& key) {
    auto [it, inserted] = index.try_emplace(key, static_cast<int>(patch.vertex.size()));
    if (inserted) {
      Point z = 0.0;
      int parity = 0;
      for (int l = 0; l < d; ++l) {
        z += static_cast<double>(key[l]) * e[l];
        parity += key[l];
      }
      patch.vertex.push_back(z);
      patch.primal.push_back(((parity % 2) + 2) % 2 == 0);
      patch.key.push_back(key);
    }
    return it->second;
  };

  std::vector<int> key(d);
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) {
      const double det = std::sin(palette[k] - palette[j]);
      const int a_lo = static_cast<int>(std::floor(-grid_radius + offsets[j]));
      const int a_hi = static_cast<int>(std::ceil(grid_radius + offsets[j]));
      const int b_lo = static_cast<int>(std::floor(-grid_radius + offsets[k]));
      const int b_hi = static_cast<int>(std::ceil(grid_radius + offsets[k]));
      for (int a = a_lo; a <= a_hi; ++a) {
        for (int b = b_lo; b <= b_hi; ++b) {
          // Solve Re(z conj(e_j)) = a - g_j, Re(z conj(e_k)) = b - g_k.
          const double pj = a - offsets[j];
          const double pk = b - offsets[k];
          const double x = (pj * std::sin(palette[k]) - pk * std::sin(palette[j])) / det;
          const double y = (pk * std::cos(palette[j]) - pj * std::cos(palette[k])) / det;
          const Point z(x, y);
          if (std::abs(z) > grid_radius) continue;
          for (int l = 0; l < d; ++l) {
            if (l == j) {
              key[l] = a;
            } else if (l == k) {
              key[l] = b;
            } else {
              const double t = x * std::cos(palette[l]) + y * std::sin(palette[l]) + offsets[l];
              if (std::abs(t - std::nearbyint(t)) < 1e-9) {
                throw StructuralError(
                    "multigrid offsets are singular: three grid lines meet "
                    "near (" + std::to_string(x) + ", " + std::to_string(y) + ")");
              }
              key[l] = static_cast<int>(std::ceil(t));
            }
          }
          std::array<int, 4> r{};
          r[0] = vertex_of(key);
          ++key[j];
          r[1] = vertex_of(key);
          ++key[k];
          r[2] = vertex_of(key);
          --key[j];
          r[3] = vertex_of(key);
          patch.rhombi.push_back(r);
        }
      }
    }
  }

  // Origin: the primal vertex nearest c0, i.e. the tile of the grid point 0.
  int origin = -1;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < patch.vertex.size(); ++v) {
    if (!patch.primal[v]) continue;
    const double dist = std::abs(patch.vertex[v] - c0);
    if (dist < best - 1e-12) {
      best = dist;
      origin = static_cast<int>(v);
    }
  }
  if (origin < 0) throw StructuralError("multigrid patch has no primal vertex");
  const Point centre = patch.vertex[origin];
  std::vector<std::array<int, 4>> inside;
  for (const auto& r : patch.rhombi) {
    bool ok = true;
    for (int c : r) ok = ok && std::abs(patch.vertex[c] - centre) <= radius;
    if (ok) inside.push_back(r);
  }
  patch.rhombi = std::move(inside);
  patch.origin = origin;
  return assemble_isoradial(std::move(patch), "multigrid", radius);
}

}  // namespace isosand
