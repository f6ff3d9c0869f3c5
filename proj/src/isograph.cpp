#include "isosand/isograph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <queue>
#include <string>

#include "isosand/angles.hpp"
#include "isosand/errors.hpp"

namespace isosand {

namespace {

constexpr double kGeomTol = 1e-9;

DiamondStep classify_step(Point from, Point to, int target,
                          std::span<const double> palette) {
  const Point step = to - from;
  const double a = std::arg(step);
  for (std::size_t j = 0; j < palette.size(); ++j) {
    const double diff = wrap_angle(a - palette[j]);
    if (std::abs(diff) < 1e-6) return {target, static_cast<int>(j), +1};
    if (std::abs(wrap_angle(diff - kPi)) < 1e-6) {
      return {target, static_cast<int>(j), -1};
    }
  }
  throw StructuralError("diamond edge direction " + std::to_string(a) +
                        " is not in the palette");
}

}  // namespace

std::vector<int> IsoradialGraph::interior(int margin) const {
  std::vector<int> out;
  for (std::size_t x = 0; x < num_vertices(); ++x) {
    if (boundary_distance[x] > margin) out.push_back(static_cast<int>(x));
  }
  return out;
}

IsoradialGraph assemble_isoradial(RhombicPatch patch, std::string builder,
                                  double radius) {
  const std::size_t nv = patch.vertex.size();
  // Normalise each rhombus to start at a primal corner and validate shape.
  for (auto& r : patch.rhombi) {
    if (!patch.primal[r[0]]) std::rotate(r.begin(), r.begin() + 1, r.end());
    for (int i = 0; i < 4; ++i) {
      const bool want_primal = (i % 2 == 0);
      if (static_cast<bool>(patch.primal[r[i]]) != want_primal) {
        throw StructuralError("rhombus corners do not alternate classes");
      }
      const double side =
          std::abs(patch.vertex[r[(i + 1) % 4]] - patch.vertex[r[i]]);
      if (std::abs(side - 1.0) > kGeomTol) {
        throw StructuralError("rhombus side length differs from 1");
      }
    }
  }

  // Keep the rhombi whose primal diagonal is reachable from the origin.
  std::vector<std::vector<std::pair<int, int>>> primal_links(nv);
  for (std::size_t i = 0; i < patch.rhombi.size(); ++i) {
    const auto& r = patch.rhombi[i];
    primal_links[r[0]].push_back({r[2], static_cast<int>(i)});
    primal_links[r[2]].push_back({r[0], static_cast<int>(i)});
  }
  std::vector<std::uint8_t> reached(nv, 0);
  std::deque<int> queue{patch.origin};
  reached[patch.origin] = 1;
  while (!queue.empty()) {
    const int x = queue.front();
    queue.pop_front();
    for (auto [y, unused] : primal_links[x]) {
      if (!reached[y]) {
        reached[y] = 1;
        queue.push_back(y);
      }
    }
  }
  std::vector<std::array<int, 4>> kept;
  for (const auto& r : patch.rhombi) {
    if (reached[r[0]]) kept.push_back(r);
  }

  // Reindex diamond vertices that survive.
  std::vector<int> remap(nv, -1);
  IsoradialGraph g;
  g.builder = std::move(builder);
  g.radius = radius;
  g.palette = patch.palette;
  const Point shift = patch.vertex[patch.origin];
  auto touch = [&](int v) {
    if (remap[v] < 0) {
      remap[v] = static_cast<int>(g.diamond_position.size());
      g.diamond_position.push_back(patch.vertex[v] - shift);
      g.primal_of_diamond.push_back(-1);
      if (!patch.key.empty()) g.tiling_key.push_back(patch.key[v]);
      if (patch.primal[v]) {
        g.primal_of_diamond.back() = static_cast<int>(g.position.size());
        g.diamond_of_primal.push_back(remap[v]);
        g.position.push_back(patch.vertex[v] - shift);
      }
    }
    return remap[v];
  };
  touch(patch.origin);
  g.origin = g.primal_of_diamond[remap[patch.origin]];
  for (auto& r : kept) {
    for (int& c : r) c = touch(c);
  }
  g.rhombi = std::move(kept);

  // Diamond adjacency, one entry per rhombus side (shared sides deduplicated).
  const std::size_t nd = g.diamond_position.size();
  g.diamond_adj.assign(nd, {});
  std::map<std::pair<int, int>, bool> seen;
  for (const auto& r : g.rhombi) {
    for (int i = 0; i < 4; ++i) {
      const int a = r[i];
      const int b = r[(i + 1) % 4];
      if (!seen.emplace(std::minmax(a, b), true).second) continue;
      g.diamond_adj[a].push_back(classify_step(
          g.diamond_position[a], g.diamond_position[b], b, g.palette));
      g.diamond_adj[b].push_back(classify_step(
          g.diamond_position[b], g.diamond_position[a], a, g.palette));
    }
  }

  // Primal edges from the primal diagonals.
  const std::size_t np = g.position.size();
  std::vector<std::vector<std::pair<int, int>>> adj(np);
  double eps = std::numeric_limits<double>::infinity();
  for (const auto& r : g.rhombi) {
    const Point p = g.diamond_position[r[0]];
    const Point lower = g.diamond_position[r[1]];
    const Point q = g.diamond_position[r[2]];
    const double theta = wrap_angle(std::arg(q - p) - std::arg(lower - p));
    if (!(theta > 0.0 && theta < 0.5 * kPi)) {
      throw StructuralError("rhombus half-angle outside (0, pi/2)");
    }
    PrimalEdge e{g.primal_of_diamond[r[0]], g.primal_of_diamond[r[2]], theta,
                 std::arg(lower - p)};
    const int id = static_cast<int>(g.edges.size());
    adj[e.u].push_back({e.v, id});
    adj[e.v].push_back({e.u, id});
    g.edges.push_back(e);
    eps = std::min({eps, theta, 0.5 * kPi - theta});
  }
  g.epsilon = eps;

  g.adj_offset.assign(np + 1, 0);
  for (std::size_t x = 0; x < np; ++x) {
    std::sort(adj[x].begin(), adj[x].end(),
              [](auto a, auto b) { return a.second < b.second; });
    g.adj_offset[x + 1] = g.adj_offset[x] + static_cast<int>(adj[x].size());
    for (auto [y, id] : adj[x]) {
      g.adj_vertex.push_back(y);
      g.adj_edge.push_back(id);
    }
  }

  // A vertex is complete when its rhombus angles close up to 2 pi.
  g.complete.assign(np, 0);
  for (std::size_t x = 0; x < np; ++x) {
    double total = 0.0;
    for (int id : g.incident_edges(static_cast<int>(x))) {
      total += 2.0 * g.edges[id].theta_bar;
    }
    g.complete[x] = std::abs(total - 2.0 * kPi) < 1e-9;
  }
  g.boundary_distance.assign(np, std::numeric_limits<int>::max());
  std::deque<int> frontier;
  for (std::size_t x = 0; x < np; ++x) {
    if (!g.complete[x]) {
      g.boundary_distance[x] = 0;
      frontier.push_back(static_cast<int>(x));
    }
  }
  while (!frontier.empty()) {
    const int x = frontier.front();
    frontier.pop_front();
    for (int y : g.neighbours(x)) {
      if (g.boundary_distance[y] > g.boundary_distance[x] + 1) {
        g.boundary_distance[y] = g.boundary_distance[x] + 1;
        frontier.push_back(y);
      }
    }
  }
  return g;
}

IsoradialGraph build_square_lattice(int radius) {
  if (radius < 1) throw DomainError("square lattice radius must be >= 1");
  RhombicPatch patch;
  patch.palette = {0.0, 0.5 * kPi};
  const int side = 2 * radius + 1;
  auto index = [&](int a, int b) { return (a + radius) * side + (b + radius); };
  patch.vertex.resize(static_cast<std::size_t>(side) * side);
  patch.primal.resize(patch.vertex.size());
  patch.key.resize(patch.vertex.size());
  for (int a = -radius; a <= radius; ++a) {
    for (int b = -radius; b <= radius; ++b) {
      patch.vertex[index(a, b)] = Point(a, b);
      patch.primal[index(a, b)] = ((a + b) % 2 == 0);
      patch.key[index(a, b)] = {a, b};
    }
  }
  for (int a = -radius; a < radius; ++a) {
    for (int b = -radius; b < radius; ++b) {
      patch.rhombi.push_back(
          {index(a, b), index(a + 1, b), index(a + 1, b + 1), index(a, b + 1)});
    }
  }
  patch.origin = index(0, 0);
  // Every square inside the box has both primal corners within max-norm
  // radius, i.e. primal graph distance <= radius.
  IsoradialGraph g = assemble_isoradial(std::move(patch), "square", radius);
  // Unused dual corners are never referenced; only primal vertices appear in
  // the primal graph, so the patch is exactly the primal ball.
  return g;
}

std::vector<double> SurfaceLift::reduced(int diamond_vertex) const {
  std::vector<double> out(d, 0.0);
  const int n1 = norm1[diamond_vertex];
  if (n1 == 0) return out;
  const auto c = of(diamond_vertex);
  for (int j = 0; j < d; ++j) out[j] = static_cast<double>(c[j]) / n1;
  return out;
}

SurfaceLift lift_coordinates(const IsoradialGraph& g) {
  SurfaceLift lift;
  lift.d = g.d();
  const std::size_t nd = g.num_diamond_vertices();
  lift.coords.assign(nd * lift.d, 0);
  lift.norm1.assign(nd, 0);
  std::vector<std::uint8_t> seen(nd, 0);
  const int root = g.diamond_of_primal[g.origin];
  std::deque<int> queue{root};
  seen[root] = 1;
  while (!queue.empty()) {
    const int x = queue.front();
    queue.pop_front();
    const auto cx = lift.of(x);
    for (const DiamondStep& s : g.diamond_adj[x]) {
      auto cy = std::span<int>(lift.coords.data() +
                                   static_cast<std::size_t>(s.to) * lift.d,
                               lift.d);
      if (!seen[s.to]) {
        seen[s.to] = 1;
        std::copy(cx.begin(), cx.end(), cy.begin());
        cy[s.direction] += s.sign;
        queue.push_back(s.to);
        continue;
      }
      for (int j = 0; j < lift.d; ++j) {
        const int expected = cx[j] + (j == s.direction ? s.sign : 0);
        if (cy[j] != expected) {
          throw StructuralError(
              "lift holonomy: inconsistent coordinates at diamond vertex " +
              std::to_string(s.to));
        }
      }
    }
  }
  for (std::size_t v = 0; v < nd; ++v) {
    if (!seen[v]) {
      throw StructuralError("diamond graph is not connected");
    }
    int total = 0;
    for (int c : lift.of(static_cast<int>(v))) total += std::abs(c);
    lift.norm1[v] = total;
  }
  return lift;
}

Point project(std::span<const double> x, std::span<const double> palette) {
  Point z = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    z += x[j] * std::polar(1.0, palette[j]);
  }
  return z;
}

Point project(std::span<const int> x, std::span<const double> palette) {
  Point z = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    z += static_cast<double>(x[j]) * std::polar(1.0, palette[j]);
  }
  return z;
}

BilipschitzReport bilipschitz_constants(const IsoradialGraph& g,
                                        const SurfaceLift& lift) {
  BilipschitzReport report{1.0, 1.0, std::numeric_limits<double>::infinity()};
  std::vector<double> support;
  for (std::size_t v = 0; v < g.num_diamond_vertices(); ++v) {
    const auto n = lift.of(static_cast<int>(v));
    const double n1 = lift.norm1[v];
    const double modulus = std::abs(project(n, g.palette));
    if (n1 == 0.0) {
      if (modulus > kGeomTol) {
        throw InvariantViolation("bi-Lipschitz: nonzero image of the origin");
      }
      continue;
    }
    if (modulus > n1 * (1.0 + 1e-12)) {
      throw InvariantViolation("bi-Lipschitz upper bound fails at vertex " +
                               std::to_string(v));
    }
    support.clear();
    for (int j = 0; j < lift.d; ++j) {
      if (n[j] > 0) support.push_back(g.palette[j]);
      if (n[j] < 0) support.push_back(g.palette[j] + kPi);
    }
    const auto centre = half_plane_centre(support);
    if (!centre) {
      throw InvariantViolation(
          "bi-Lipschitz: support directions of vertex " + std::to_string(v) +
          " do not fit in a half-plane");
    }
    double delta = 1.0;
    for (double a : support) {
      delta = std::min(delta, std::cos(wrap_angle(a - *centre)));
    }
    if (modulus < delta * n1 * (1.0 - 1e-12)) {
      throw InvariantViolation("bi-Lipschitz lower bound fails at vertex " +
                               std::to_string(v));
    }
    report.lower = std::min(report.lower, delta);
    report.worst_ratio = std::min(report.worst_ratio, modulus / n1);
  }
  return report;
}

std::vector<std::vector<double>> admissible_directions_estimate(
    const IsoradialGraph& g, const SurfaceLift& lift, double r1, double r2,
    double tolerance) {
  std::vector<std::vector<double>> dirs;
  for (std::size_t v = 0; v < g.num_diamond_vertices(); ++v) {
    const int n1 = lift.norm1[v];
    if (n1 >= r1 && n1 <= r2) dirs.push_back(lift.reduced(static_cast<int>(v)));
  }
  if (dirs.empty()) {
    throw DomainError("admissible directions: annulus contains no vertex");
  }
  std::sort(dirs.begin(), dirs.end());
  std::vector<std::vector<double>> unique;
  for (auto& s : dirs) {
    bool duplicate = false;
    for (auto it = unique.rbegin(); it != unique.rend(); ++it) {
      double dist = 0.0;
      for (std::size_t j = 0; j < s.size(); ++j) dist += std::abs(s[j] - (*it)[j]);
      if (dist <= tolerance) {
        duplicate = true;
        break;
      }
      // Sorted lexicographically: once the leading coordinate separates by
      // more than the tolerance no earlier entry can be within it.
      if (s[0] - (*it)[0] > tolerance) break;
    }
    if (!duplicate) unique.push_back(std::move(s));
  }
  return unique;
}

FlatnessReport check_asymptotic_flatness(
    const IsoradialGraph& g, const SurfaceLift& lift, int direction_bins,
    std::span<const std::array<double, 2>> annuli) {
  if (direction_bins < 1) throw DomainError("flatness: need at least one bin");
  const int d = lift.d;
  const std::size_t na = annuli.size();
  // sums[bin][annulus] accumulates reduced coordinates.
  std::vector<std::vector<std::vector<double>>> sums(
      direction_bins, std::vector<std::vector<double>>(na, std::vector<double>(d, 0.0)));
  std::vector<std::vector<int>> counts(direction_bins, std::vector<int>(na, 0));
  for (std::size_t v = 0; v < g.num_diamond_vertices(); ++v) {
    const Point z = g.diamond_position[v];
    const double r = std::abs(z);
    if (r == 0.0) continue;
    double angle = std::arg(z);
    if (angle < 0) angle += 2.0 * kPi;
    const int bin = std::min(direction_bins - 1,
                             static_cast<int>(angle / (2.0 * kPi) * direction_bins));
    for (std::size_t a = 0; a < na; ++a) {
      if (r < annuli[a][0] || r > annuli[a][1]) continue;
      const auto s = lift.reduced(static_cast<int>(v));
      for (int j = 0; j < d; ++j) sums[bin][a][j] += s[j];
      ++counts[bin][a];
    }
  }
  FlatnessReport report{{}, 0.0};
  for (int b = 0; b < direction_bins; ++b) {
    FlatnessBin fb{(b + 0.5) * 2.0 * kPi / direction_bins, std::vector<double>(d, 0.0),
                   0.0, 0};
    std::vector<std::vector<double>> means;
    for (std::size_t a = 0; a < na; ++a) {
      if (counts[b][a] == 0) continue;
      std::vector<double> mean(d);
      for (int j = 0; j < d; ++j) mean[j] = sums[b][a][j] / counts[b][a];
      means.push_back(mean);
      fb.direction = mean;  // outermost annulus seen last when sorted by radius
    }
    fb.annuli_hit = static_cast<int>(means.size());
    for (std::size_t i = 0; i < means.size(); ++i) {
      for (std::size_t k = i + 1; k < means.size(); ++k) {
        double dist = 0.0;
        for (int j = 0; j < d; ++j) dist += std::abs(means[i][j] - means[k][j]);
        fb.spread = std::max(fb.spread, dist);
      }
    }
    report.max_spread = std::max(report.max_spread, fb.spread);
    report.bins.push_back(std::move(fb));
  }
  return report;
}

}  // namespace isosand
