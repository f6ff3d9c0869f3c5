#include "isosand/sandpile.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <random>
#include <string>

#include "isosand/angles.hpp"
#include "isosand/errors.hpp"

namespace isosand {

namespace {

// Shared set-up and guards of every stabilizer.
struct Toppler {
  const WeightedGraph& w;
  const IsoradialGraph& g;
  SandpileState state;
  int margin;
  std::int64_t cap;

  Toppler(const WeightedGraph& weighted, double N, int x0, const StabilizeOptions& opt)
      : w(weighted), g(weighted.graph()), margin(opt.margin) {
    if (w.params.k == 0.0) {
      throw DomainError("sandpile: k = 0 has no mass, stabilization is not guaranteed");
    }
    if (!(N >= 0.0)) throw DomainError("sandpile: N must be nonnegative");
    const int n = static_cast<int>(w.size());
    if (x0 < 0 || x0 >= n) throw DomainError("sandpile: origin out of range");
    state.amounts.assign(n, 0.0);
    state.topples.assign(n, 0);
    state.amounts[x0] = N;
    state.N = N;
    state.x0 = x0;
    double min_mass = std::numeric_limits<double>::infinity();
    for (int x = 0; x < n; ++x) {
      if (g.complete[x]) min_mass = std::min(min_mass, w.mass2[x]);
    }
    cap = opt.max_topples > 0 ? opt.max_topples
                              : static_cast<std::int64_t>(N / min_mass) + 1;
  }

  bool unstable(int x) const { return !(state.amounts[x] < w.diag[x]); }

  void guard(int x, std::int64_t count) {
    if (g.boundary_distance[x] <= margin) {
      throw RegionTooSmall("sandpile: vertex " + std::to_string(x) +
                           " at boundary distance " +
                           std::to_string(g.boundary_distance[x]) + " must topple");
    }
    state.total_topples += count;
    if (state.total_topples > cap) {
      throw NumericalError("sandpile: topple count exceeds the finiteness bound " +
                           std::to_string(cap));
    }
  }

  // t topples of x: subtracts t D(x), adds t rho to the neighbours.
  template <typename OnUnstable>
  void topple(int x, std::int64_t t, OnUnstable&& on_unstable) {
    guard(x, t);
    state.topples[x] += t;
    state.amounts[x] -= static_cast<double>(t) * w.diag[x];
    for (int slot = g.adj_offset[x]; slot < g.adj_offset[x + 1]; ++slot) {
      const int y = g.adj_vertex[slot];
      state.amounts[y] += static_cast<double>(t) * w.adj_rho[slot];
      if (unstable(y)) on_unstable(y);
    }
  }

  // floor(s / D) corrected so the remainder is never negative.
  std::int64_t batch(int x) const {
    auto t = static_cast<std::int64_t>(std::floor(state.amounts[x] / w.diag[x]));
    while (t > 1 && state.amounts[x] - static_cast<double>(t) * w.diag[x] < 0.0) --t;
    return std::max<std::int64_t>(t, 1);
  }

  SandpileState finish() {
    const int n = static_cast<int>(w.size());
    state.odometer.resize(n);
    for (int x = 0; x < n; ++x) {
      state.odometer[x] = static_cast<double>(state.topples[x]) * w.diag[x];
    }
    return std::move(state);
  }
};

template <bool Batched>
SandpileState stabilize_fifo(const WeightedGraph& w, double N, int x0,
                             const StabilizeOptions& opt) {
  Toppler tp(w, N, x0, opt);
  std::vector<std::uint8_t> queued(w.size(), 0);
  std::deque<int> queue;
  auto push = [&](int y) {
    if (!queued[y]) {
      queued[y] = 1;
      queue.push_back(y);
    }
  };
  if (tp.unstable(x0)) push(x0);
  while (!queue.empty()) {
    const int x = queue.front();
    queue.pop_front();
    queued[x] = 0;
    if (!tp.unstable(x)) continue;
    tp.topple(x, Batched ? tp.batch(x) : 1, push);
    if (tp.unstable(x)) push(x);
  }
  return tp.finish();
}

}  // namespace

SandpileState stabilize(const WeightedGraph& w, double N, int x0,
                        const StabilizeOptions& opt) {
  return stabilize_fifo<false>(w, N, x0, opt);
}

SandpileState stabilize_batched(const WeightedGraph& w, double N, int x0,
                                const StabilizeOptions& opt) {
  return stabilize_fifo<true>(w, N, x0, opt);
}

SandpileState stabilize_random_order(const WeightedGraph& w, double N, int x0,
                                     std::uint64_t seed, const StabilizeOptions& opt) {
  Toppler tp(w, N, x0, opt);
  std::mt19937_64 rng(seed);
  // Unstable set with O(1) insertion and random removal.
  std::vector<int> pool;
  std::vector<int> where(w.size(), -1);
  auto add = [&](int y) {
    if (where[y] < 0) {
      where[y] = static_cast<int>(pool.size());
      pool.push_back(y);
    }
  };
  auto remove = [&](int y) {
    const int i = where[y];
    where[pool.back()] = i;
    pool[i] = pool.back();
    pool.pop_back();
    where[y] = -1;
  };
  if (tp.unstable(x0)) add(x0);
  while (!pool.empty()) {
    const auto i = std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng);
    const int x = pool[i];
    tp.topple(x, 1, add);
    if (!tp.unstable(x)) remove(x);
  }
  return tp.finish();
}

SandpileState stabilize_parallel(const WeightedGraph& w, double N, int x0, int workers,
                                 const StabilizeOptions& opt) {
  if (workers < 1) throw DomainError("sandpile: workers must be >= 1");
  Toppler tp(w, N, x0, opt);
  const IsoradialGraph& g = tp.g;
  const int n = static_cast<int>(w.size());
  std::vector<std::int64_t> fire(n, 0);
  std::vector<int> stamp(n, -1);
  std::vector<int> active;
  if (tp.unstable(x0)) active.push_back(x0);
  int round = 0;
  std::vector<int> affected;
  while (!active.empty()) {
    const int na = static_cast<int>(active.size());
    std::int64_t fired = 0;
    // Phase 1: topple counts of this round.
#pragma omp parallel for num_threads(workers) schedule(static) reduction(+ : fired)
    for (int i = 0; i < na; ++i) {
      const int x = active[i];
      fire[x] = tp.batch(x);
      fired += fire[x];
    }
    for (int x : active) tp.guard(x, 0);
    tp.state.total_topples += fired;
    if (tp.state.total_topples > tp.cap) {
      throw NumericalError("sandpile: topple count exceeds the finiteness bound " +
                           std::to_string(tp.cap));
    }
    // Phase 2: vertices whose amount changes, in a fixed order.
    affected.clear();
    for (int x : active) {
      if (stamp[x] != round) {
        stamp[x] = round;
        affected.push_back(x);
      }
      for (int y : g.neighbours(x)) {
        if (stamp[y] != round) {
          stamp[y] = round;
          affected.push_back(y);
        }
      }
    }
    // Phase 3: each affected vertex pulls its inflow.
    const int nf = static_cast<int>(affected.size());
#pragma omp parallel for num_threads(workers) schedule(static)
    for (int i = 0; i < nf; ++i) {
      const int y = affected[i];
      double s = tp.state.amounts[y] - static_cast<double>(fire[y]) * w.diag[y];
      for (int slot = g.adj_offset[y]; slot < g.adj_offset[y + 1]; ++slot) {
        const int x = g.adj_vertex[slot];
        if (fire[x] > 0) s += static_cast<double>(fire[x]) * w.adj_rho[slot];
      }
      tp.state.amounts[y] = s;
    }
    for (int x : active) {
      tp.state.topples[x] += fire[x];
      fire[x] = 0;
    }
    active.clear();
    for (int y : affected) {
      if (tp.unstable(y)) active.push_back(y);
    }
    ++round;
  }
  tp.state.rounds = round;
  return tp.finish();
}

std::vector<int> shape(const SandpileState& state) {
  std::vector<int> out;
  for (std::size_t x = 0; x < state.odometer.size(); ++x) {
    if (state.odometer[x] > 0.0) out.push_back(static_cast<int>(x));
  }
  return out;
}

bool is_stable(const WeightedGraph& w, const SandpileState& state) {
  for (std::size_t x = 0; x < w.size(); ++x) {
    if (!(state.amounts[x] < w.diag[x]) || state.amounts[x] < 0.0) return false;
  }
  return true;
}

double mass_balance_error(const WeightedGraph& w, const SandpileState& state) {
  double sand = 0.0;
  double leaked = 0.0;
  for (std::size_t x = 0; x < w.size(); ++x) {
    sand += state.amounts[x];
    leaked += static_cast<double>(state.topples[x]) * w.mass2[x];
  }
  return std::abs(sand - (state.N - leaked));
}

double verify_odometer_identity(const WeightedGraph& w, const SandpileState& state) {
  std::vector<double> tu;
  operator_T_apply(w, state.odometer, tu);
  double worst = 0.0;
  for (std::size_t x = 0; x < w.size(); ++x) {
    const double s0 = static_cast<int>(x) == state.x0 ? state.N : 0.0;
    worst = std::max(worst, std::abs(tu[x] - (state.amounts[x] - s0)));
  }
  return worst;
}

double max_odometer_difference(const SandpileState& a, const SandpileState& b) {
  if (a.odometer.size() != b.odometer.size()) {
    throw DomainError("odometer comparison: states differ in size");
  }
  double worst = 0.0;
  for (std::size_t x = 0; x < a.odometer.size(); ++x) {
    worst = std::max(worst, std::abs(a.odometer[x] - b.odometer[x]));
  }
  return worst;
}

ThresholdReport verify_threshold(const WeightedGraph& w, const SandpileState& state,
                                 const GreenField& green, const ModelBounds& bounds) {
  if (green.origin != state.x0) throw DomainError("threshold: Green origin differs from x0");
  ThresholdReport r;
  r.alpha = bounds.alpha;
  r.beta = bounds.beta;
  r.c = bounds.c;
  r.c_prime = bounds.c_prime;
  const double N = state.N;
  // Solver round-off allowance on the U scale (U(x0, x0) >= 1).
  const double slack = 1e-10 * green.U[state.x0];
  r.sandwich_max = -std::numeric_limits<double>::infinity();
  r.sandwich_min_scaled = std::numeric_limits<double>::infinity();
  auto fail = [&r](int x) {
    if (r.failing.size() < 32) r.failing.push_back(x);
  };
  for (std::size_t xi = 0; xi < w.size(); ++xi) {
    if (!green.interior[xi]) continue;
    const int x = static_cast<int>(xi);
    ++r.checked;
    const bool in_shape = state.odometer[x] > 0.0;
    const double U = green.U[x];
    const double Gr = green.Gr[x];
    const double gap = state.odometer[x] / N - U;
    r.sandwich_max = std::max(r.sandwich_max, gap);
    r.sandwich_min_scaled = std::min(r.sandwich_min_scaled, N * gap);
    if (gap > slack || gap < -bounds.alpha / N - slack) {
      ++r.sandwich_violations;
      fail(x);
    }
    if (!in_shape && U > bounds.alpha / N) {
      ++r.inner_violations_U;
      fail(x);
    }
    if (in_shape && U < bounds.beta / N) {
      ++r.outer_violations_U;
      fail(x);
    }
    if (!in_shape && Gr > bounds.alpha / (bounds.c * N)) {
      ++r.inner_violations_Gr;
      fail(x);
    }
    if (in_shape && Gr < bounds.beta / (bounds.c_prime * N)) {
      ++r.outer_violations_Gr;
      fail(x);
    }
    if (!in_shape && Gr > bounds.alpha / N) ++r.inner_violations_Gr_literal;
    if (in_shape && Gr < bounds.beta / N) ++r.outer_violations_Gr_literal;
  }
  return r;
}

namespace {

int plane_bin(Point z, int bins) {
  double angle = std::arg(z);
  if (angle < 0.0) angle += 2.0 * kPi;
  return std::min(bins - 1, static_cast<int>(angle / (2.0 * kPi) * bins));
}

}  // namespace

BoundaryRadii boundary_radii(const IsoradialGraph& g, const SandpileState& state,
                             const SurfaceLift& lift, int bins, int lift_resolution) {
  if (bins < 1) throw DomainError("boundary radii: need at least one bin");
  BoundaryRadii out;
  std::vector<RadiusBin> plane(bins);
  std::vector<double> inner(bins, std::numeric_limits<double>::infinity());
  std::map<std::vector<int>, LiftRadiusCell> cells;
  for (std::size_t x = 0; x < g.num_vertices(); ++x) {
    const Point z = g.position[x];
    const int dv = g.diamond_of_primal[x];
    const double l1 = lift.norm1[dv];
    const bool member = state.odometer[x] > 0.0;
    if (std::abs(z) == 0.0) continue;  // the origin has no direction
    const int b = plane_bin(z, bins);
    if (!member) {
      inner[b] = std::min(inner[b], l1);
      continue;
    }
    RadiusBin& rb = plane[b];
    const double rz = std::abs(z);
    if (rb.members == 0) {
      rb.min_l1 = rb.max_l1 = l1;
      rb.min_plane = rb.max_plane = rz;
      rb.outer_vertex = static_cast<int>(x);
    } else {
      rb.min_l1 = std::min(rb.min_l1, l1);
      rb.min_plane = std::min(rb.min_plane, rz);
      rb.max_plane = std::max(rb.max_plane, rz);
      if (l1 > rb.max_l1) {
        rb.max_l1 = l1;
        rb.outer_vertex = static_cast<int>(x);
      }
    }
    ++rb.members;
    std::vector<int> key(lift.d);
    const auto n = lift.of(dv);
    for (int j = 0; j < lift.d; ++j) {
      key[j] = static_cast<int>(std::lround(lift_resolution * n[j] / l1));
    }
    auto [it, fresh] = cells.try_emplace(key);
    LiftRadiusCell& cell = it->second;
    if (fresh) {
      cell.key = key;
      cell.min_l1 = cell.max_l1 = l1;
    }
    cell.min_l1 = std::min(cell.min_l1, l1);
    cell.max_l1 = std::max(cell.max_l1, l1);
    ++cell.members;
  }
  for (int b = 0; b < bins; ++b) {
    if (plane[b].members == 0) continue;
    plane[b].angle = (b + 0.5) * 2.0 * kPi / bins;
    plane[b].inner_l1 = inner[b];
    out.plane.push_back(plane[b]);
  }
  for (auto& [key, cell] : cells) out.lifted.push_back(cell);
  return out;
}

ShapeError limit_shape_error(const WeightedGraph& w, const SandpileState& state,
                             const SurfaceLift& lift, int bins) {
  const IsoradialGraph& g = w.graph();
  ShapeError err;
  err.N = state.N;
  const double log_n = std::log(state.N);
  const auto radii = boundary_radii(g, state, lift, bins);
  double sum = 0.0;
  for (const auto& rb : radii.plane) {
    const int dv = g.diamond_of_primal[rb.outer_vertex];
    const auto n = lift.of(dv);
    std::vector<double> s(n.begin(), n.end());
    const auto prof = direction_profile(s, g.palette, w.params);
    ShapeErrorBin e{rb.angle, rb.outer_vertex, rb.max_l1, prof.radius, 0.0};
    e.relative_error = std::abs(rb.max_l1 / log_n - prof.radius) / prof.radius;
    err.max_error = std::max(err.max_error, e.relative_error);
    sum += e.relative_error;
    err.bins.push_back(e);
  }
  err.mean_error = err.bins.empty() ? 0.0 : sum / err.bins.size();
  return err;
}

int predicted_patch_radius(const IsoradialGraph& g, const SurfaceLift& lift,
                           const ElliptParams& p, double N, double safety, int margin) {
  int outer = 0;
  for (int v : lift.norm1) outer = std::max(outer, v);
  const auto dirs = admissible_directions_estimate(g, lift, 0.5 * outer, outer, 1e-6);
  double widest = 0.0;
  for (const auto& s : dirs) {
    const auto prof = direction_profile(s, g.palette, p);
    widest = std::max(widest, prof.radius * std::abs(project(std::span<const double>(s),
                                                              g.palette)));
  }
  return static_cast<int>(std::ceil(widest * std::log(std::max(N, 2.0)) * safety)) + margin;
}

}  // namespace isosand
