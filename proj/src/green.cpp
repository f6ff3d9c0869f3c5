#include "isosand/green.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <string>

#include "isosand/angles.hpp"
#include "isosand/errors.hpp"

namespace isosand {

namespace {

bool inside(RegionMask region, int x) { return region.empty() || region[x]; }

double dot(std::span<const double> a, std::span<const double> b) {
  const int n = static_cast<int>(a.size());
  double total = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : total)
  for (int i = 0; i < n; ++i) total += a[i] * b[i];
  return total;
}

int iteration_cap(const SolverOptions& opt, std::size_t n) {
  if (opt.max_iterations > 0) return opt.max_iterations;
  return static_cast<int>(std::max<std::size_t>(10000, 20 * n));
}

// Vertices farther than `margin` (primal graph distance) from the patch
// boundary and from everything outside the region.
std::vector<std::uint8_t> interior_of(const IsoradialGraph& g, RegionMask region,
                                      int margin) {
  const std::size_t n = g.num_vertices();
  std::vector<int> dist(n, std::numeric_limits<int>::max());
  std::deque<int> queue;
  for (std::size_t x = 0; x < n; ++x) {
    if (!g.complete[x] || !inside(region, static_cast<int>(x))) {
      dist[x] = 0;
      queue.push_back(static_cast<int>(x));
    }
  }
  while (!queue.empty()) {
    const int x = queue.front();
    queue.pop_front();
    for (int y : g.neighbours(x)) {
      if (dist[y] > dist[x] + 1) {
        dist[y] = dist[x] + 1;
        queue.push_back(y);
      }
    }
  }
  std::vector<std::uint8_t> out(n, 0);
  for (std::size_t x = 0; x < n; ++x) out[x] = dist[x] > margin;
  return out;
}

}  // namespace

double decay_bound_base(const ElliptParams& p, double epsilon) {
  const double eps_ell = elliptic_angle(epsilon, p);
  return p.k_prime * jacobi_ratio("nd", 0.5 * eps_ell, p);
}

int truncation_radius(const ElliptParams& p, double epsilon, double tol,
                      int massless_cap) {
  if (!(tol > 0.0)) throw DomainError("truncation radius: tolerance must be positive");
  if (p.k == 0.0) {
    if (massless_cap < 0) {
      throw DomainError("truncation radius: no exponential decay at k = 0");
    }
    return massless_cap;
  }
  if (tol >= 1.0) return 0;
  const double base = decay_bound_base(p, epsilon);
  if (!(base < 1.0)) {
    throw NumericalError("truncation radius: decay base " + std::to_string(base) +
                         " is not below 1");
  }
  return static_cast<int>(std::ceil(std::log(tol) / std::log(base)));
}

std::vector<double> solve_massive_laplacian(const WeightedGraph& w,
                                            std::span<const double> rhs,
                                            RegionMask region, const SolverOptions& opt,
                                            SolveStats* stats) {
  const int n = static_cast<int>(w.size());
  std::vector<double> x(n, 0.0);
  std::vector<double> r(rhs.begin(), rhs.end());
  for (int i = 0; i < n; ++i) {
    if (!inside(region, i)) r[i] = 0.0;
  }
  std::vector<double> p = r;
  std::vector<double> ap;
  const double b_norm = std::sqrt(dot(r, r));
  double rr = b_norm * b_norm;
  const int cap = iteration_cap(opt, n);
  int it = 0;
  if (b_norm > 0.0) {
    while (std::sqrt(rr) > opt.tolerance * b_norm) {
      if (it >= cap) {
        throw NumericalError("conjugate gradient: no convergence in " +
                             std::to_string(cap) + " iterations, relative residual " +
                             std::to_string(std::sqrt(rr) / b_norm));
      }
      laplacian_apply(w, p, ap, region);
      const double alpha = rr / dot(p, ap);
#pragma omp parallel for schedule(static)
      for (int i = 0; i < n; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * ap[i];
      }
      const double rr_next = dot(r, r);
      const double beta = rr_next / rr;
      rr = rr_next;
#pragma omp parallel for schedule(static)
      for (int i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
      ++it;
    }
  }
  if (stats) {
    stats->iterations = it;
    laplacian_apply(w, x, ap, region);
    double res = 0.0;
    for (int i = 0; i < n; ++i) {
      if (inside(region, i)) res = std::max(res, std::abs(ap[i] - rhs[i]));
    }
    stats->residual = res;
  }
  return x;
}

std::vector<double> potential_row_series(const WeightedGraph& w, int x0, RegionMask region,
                                         const SolverOptions& opt, SolveStats* stats) {
  const IsoradialGraph& g = w.graph();
  const int n = static_cast<int>(w.size());
  if (!inside(region, x0)) throw DomainError("series solve: origin outside region");
  double kill = std::numeric_limits<double>::infinity();
  for (int x = 0; x < n; ++x) {
    if (inside(region, x)) kill = std::min(kill, w.mass2[x] / w.diag[x]);
  }
  // The bulk kill rate sets the expected length of the series.
  double bulk_kill = std::numeric_limits<double>::infinity();
  for (int x = 0; x < n; ++x) {
    if (inside(region, x) && g.complete[x]) bulk_kill = std::min(bulk_kill, w.mass2[x] / w.diag[x]);
  }
  if (!std::isfinite(bulk_kill)) bulk_kill = kill;
  int cap = iteration_cap(opt, n);
  if (opt.max_iterations <= 0 && bulk_kill > 0.0) {
    const double expected = -std::log(opt.tolerance) / bulk_kill;
    cap = static_cast<int>(std::min(1e9, std::max<double>(cap, 2.0 * expected)));
  }
  std::vector<double> total(n, 0.0);
  std::vector<double> v(n, 0.0);
  std::vector<double> scaled(n, 0.0);
  std::vector<double> next(n, 0.0);
  v[x0] = 1.0;
  double mass_1 = 0.0;
  double mass_2 = 0.0;
  double prev_ratio = 2.0;
  int it = 0;
  for (;; ++it) {
    double mass = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : mass)
    for (int x = 0; x < n; ++x) {
      total[x] += v[x];
      scaled[x] = v[x] / w.diag[x];
      mass += v[x];
    }
    // Rigorous tail bound: every step keeps at most (1 - kill) of the mass.
    // Boundary vertices of a patch carry tiny masses, so once the two-step
    // contraction ratio r has settled (bipartite graphs oscillate between
    // steps), the geometric tail (m_{n-1} + m_n) r / (1 - r) is used instead.
    double tail = kill > 0.0 ? mass / kill : mass;
    const double ratio = mass_2 > 0.0 ? mass / mass_2 : 1.0;
    if (ratio < 1.0 && std::abs(ratio - prev_ratio) < 1e-6 * (1.0 - ratio)) {
      tail = std::min(tail, (mass_1 + mass) * ratio / (1.0 - ratio));
    }
    prev_ratio = ratio;
    mass_2 = mass_1;
    mass_1 = mass;
    if (tail <= opt.tolerance * total[x0]) break;
    if (it >= cap) {
      throw NumericalError("Neumann series: tail bound " + std::to_string(tail) +
                           " after " + std::to_string(cap) + " iterations");
    }
#pragma omp parallel for schedule(static)
    for (int y = 0; y < n; ++y) {
      double acc = 0.0;
      if (inside(region, y)) {
        for (int slot = g.adj_offset[y]; slot < g.adj_offset[y + 1]; ++slot) {
          const int x = g.adj_vertex[slot];
          if (inside(region, x)) acc += w.adj_rho[slot] * scaled[x];
        }
      }
      next[y] = acc;
    }
    v.swap(next);
  }
  if (stats) {
    stats->iterations = it;
    // Row x0 of U = Delta^-1 D: Delta (U / D) = delta_x0.
    std::vector<double> gr(n), lap;
    for (int x = 0; x < n; ++x) gr[x] = total[x] / w.diag[x];
    laplacian_apply(w, gr, lap, region);
    double res = 0.0;
    for (int x = 0; x < n; ++x) {
      if (inside(region, x)) res = std::max(res, std::abs(lap[x] - (x == x0 ? 1.0 : 0.0)));
    }
    stats->residual = res;
  }
  return total;
}

std::vector<double> potential_column_sums(const WeightedGraph& w, RegionMask region) {
  const int n = static_cast<int>(w.size());
  std::vector<double> ones(n, 1.0);
  auto h = solve_massive_laplacian(w, ones, region);
  for (int x = 0; x < n; ++x) h[x] = inside(region, x) ? h[x] * w.diag[x] : 0.0;
  return h;
}

GreenField solve_potential(const WeightedGraph& w, int x0,
                           std::span<const std::uint8_t> region, GreenMethod method,
                           int interior_margin, const SolverOptions& opt) {
  const IsoradialGraph& g = w.graph();
  const int n = static_cast<int>(w.size());
  if (x0 < 0 || x0 >= n) throw DomainError("green: origin out of range");
  if (!inside(region, x0)) throw DomainError("green: origin outside the region");
  GreenField field;
  field.origin = x0;
  field.region.assign(region.begin(), region.end());
  field.interior = interior_of(g, region, interior_margin);
  field.truncation_radius = g.boundary_distance[x0];
  field.method = method;
  SolveStats stats;
  if (method == GreenMethod::ConjugateGradient) {
    std::vector<double> rhs(n, 0.0);
    rhs[x0] = 1.0;
    field.Gr = solve_massive_laplacian(w, rhs, region, opt, &stats);
    field.U.resize(n);
    for (int x = 0; x < n; ++x) field.U[x] = field.Gr[x] * w.diag[x];
  } else {
    field.U = potential_row_series(w, x0, region, opt, &stats);
    field.Gr.resize(n);
    for (int x = 0; x < n; ++x) field.Gr[x] = field.U[x] / w.diag[x];
  }
  field.iterations = stats.iterations;
  std::vector<double> lap;
  laplacian_apply(w, field.Gr, lap, region);
  for (int x = 0; x < n; ++x) {
    if (field.interior[x]) {
      field.residual = std::max(field.residual, std::abs(lap[x] - (x == x0 ? 1.0 : 0.0)));
    }
  }
  return field;
}

CrossValidation cross_validate(const WeightedGraph& w, int x0,
                               std::span<const std::uint8_t> region, int interior_margin) {
  const auto cg = solve_potential(w, x0, region, GreenMethod::ConjugateGradient,
                                  interior_margin);
  const auto series = solve_potential(w, x0, region, GreenMethod::NeumannSeries,
                                      interior_margin);
  CrossValidation cv{0.0, cg.residual, series.residual, cg.iterations, series.iterations};
  double scale = 0.0;
  double diff = 0.0;
  for (std::size_t x = 0; x < cg.U.size(); ++x) {
    if (!cg.interior[x]) continue;
    scale = std::max(scale, std::abs(cg.U[x]));
    diff = std::max(diff, std::abs(cg.U[x] - series.U[x]));
  }
  cv.relative_difference = scale > 0.0 ? diff / scale : diff;
  return cv;
}

AsymptoticGreenParams asymptotic_params(const DirectionProfile& profile) {
  return {profile.s, profile.u_s, -profile.rate, profile.chi2_us};
}

double asymptotic_green(const WeightedGraph& w, const SurfaceLift& lift, int x0, int y,
                        const DirectionProfile& profile) {
  const IsoradialGraph& g = w.graph();
  const auto a = lift.of(g.diamond_of_primal[x0]);
  const auto b = lift.of(g.diamond_of_primal[y]);
  const auto theta = profile.theta_original();
  double norm1 = 0.0;
  double exponent = 0.0;
  for (int j = 0; j < lift.d; ++j) {
    const double nj = b[j] - a[j];
    norm1 += std::abs(nj);
    exponent += nj * theta[j];
  }
  if (norm1 < 1.0) throw DomainError("asymptotic green: need |n|_1 >= 1");
  return w.params.k_prime * std::exp(-exponent) /
         (2.0 * std::sqrt(2.0 * kPi * norm1 * profile.chi2_us));
}

std::vector<int> diamond_path(const IsoradialGraph& g, int a, int b, std::uint64_t seed) {
  const std::size_t nd = g.num_diamond_vertices();
  std::vector<int> dist(nd, -1);
  std::deque<int> queue{a};
  dist[a] = 0;
  while (!queue.empty() && dist[b] < 0) {
    const int x = queue.front();
    queue.pop_front();
    for (const auto& s : g.diamond_adj[x]) {
      if (dist[s.to] < 0) {
        dist[s.to] = dist[x] + 1;
        queue.push_back(s.to);
      }
    }
  }
  if (dist[b] < 0) throw StructuralError("diamond path: vertices are not connected");
  std::mt19937_64 rng(seed);
  std::vector<int> path{b};
  int cur = b;
  while (cur != a) {
    std::vector<int> back;
    for (const auto& s : g.diamond_adj[cur]) {
      if (dist[s.to] == dist[cur] - 1) back.push_back(s.to);
    }
    std::size_t pick = 0;
    if (seed != 0 && back.size() > 1) {
      pick = std::uniform_int_distribution<std::size_t>(0, back.size() - 1)(rng);
    }
    cur = back[pick];
    path.push_back(cur);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

namespace {

std::complex<double> step_factor(const WeightedGraph& w, int direction, int sign, double u) {
  const ElliptParams& p = w.params;
  const double natural = w.graph().palette[direction] + (sign < 0 ? kPi : 0.0);
  const double alpha = elliptic_angle(natural, p);
  return std::complex<double>(0.0, std::sqrt(p.k_prime)) *
         jacobi_ratio("sc", 0.5 * (u - alpha), p);
}

}  // namespace

std::complex<double> discrete_exponential_along(const WeightedGraph& w,
                                                std::span<const int> path, double u) {
  const IsoradialGraph& g = w.graph();
  std::complex<double> e = 1.0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const auto& steps = g.diamond_adj[path[i]];
    auto it = std::find_if(steps.begin(), steps.end(),
                           [&](const DiamondStep& s) { return s.to == path[i + 1]; });
    if (it == steps.end()) throw DomainError("discrete exponential: path is not a diamond path");
    e *= step_factor(w, it->direction, it->sign, u);
  }
  return e;
}

std::complex<double> discrete_exponential(const WeightedGraph& w, int x, int y, double u,
                                          std::uint64_t seed) {
  const auto path = diamond_path(w.graph(), x, y, seed);
  return discrete_exponential_along(w, path, u);
}

std::complex<double> discrete_exponential_from_lift(const WeightedGraph& w,
                                                    const SurfaceLift& lift, int x, int y,
                                                    double u) {
  const auto a = lift.of(x);
  const auto b = lift.of(y);
  std::complex<double> e = 1.0;
  for (int j = 0; j < lift.d; ++j) {
    const int steps = b[j] - a[j];
    if (steps == 0) continue;
    const std::complex<double> f = step_factor(w, j, steps > 0 ? 1 : -1, u);
    for (int t = 0; t < std::abs(steps); ++t) e *= f;
  }
  return e;
}

}  // namespace isosand
