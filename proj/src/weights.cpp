#include "isosand/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "isosand/errors.hpp"

namespace isosand {

double conductance(const PrimalEdge& e, const ElliptParams& p) {
  if (p.k == 0.0) return std::tan(e.theta_bar);
  return jacobi_ratio("sc", elliptic_angle(e.theta_bar, p), p);
}

namespace {

double mass_term(double theta_bar, const ElliptParams& p) {
  if (p.k == 0.0) return 0.0;
  const double theta = elliptic_angle(theta_bar, p);
  return func_A(theta, p) - jacobi_ratio("sc", theta, p);
}

}  // namespace

double vertex_mass_squared(const IsoradialGraph& g, int x, const ElliptParams& p) {
  double total = 0.0;
  for (int id : g.incident_edges(x)) total += mass_term(g.edges[id].theta_bar, p);
  return total;
}

WeightedGraph weigh_graph(std::shared_ptr<const IsoradialGraph> g, double k) {
  WeightedGraph w;
  w.params = complete_integrals(k);
  w.base = std::move(g);
  const IsoradialGraph& graph = *w.base;

  // Half-angles come from a small palette; key them at 1e-12 resolution.
  std::map<long long, std::pair<double, double>> cache;
  auto weights_of = [&](double theta_bar) {
    const long long key = std::llround(theta_bar * 1e12);
    auto it = cache.find(key);
    if (it == cache.end()) {
      PrimalEdge probe{0, 0, theta_bar, 0.0};
      it = cache.emplace(key, std::make_pair(conductance(probe, w.params),
                                             mass_term(theta_bar, w.params)))
               .first;
    }
    return it->second;
  };

  w.rho.resize(graph.edges.size());
  std::vector<double> edge_mass(graph.edges.size());
  for (std::size_t i = 0; i < graph.edges.size(); ++i) {
    const auto [rho, mass] = weights_of(graph.edges[i].theta_bar);
    w.rho[i] = rho;
    edge_mass[i] = mass;
  }
  const std::size_t n = graph.num_vertices();
  w.mass2.assign(n, 0.0);
  w.diag.assign(n, 0.0);
  w.adj_rho.resize(graph.adj_edge.size());
  for (std::size_t x = 0; x < n; ++x) {
    double rho_sum = 0.0;
    double mass = 0.0;
    for (int slot = graph.adj_offset[x]; slot < graph.adj_offset[x + 1]; ++slot) {
      const int id = graph.adj_edge[slot];
      w.adj_rho[slot] = w.rho[id];
      rho_sum += w.rho[id];
      mass += edge_mass[id];
    }
    w.mass2[x] = mass;
    w.diag[x] = rho_sum + mass;
  }
  return w;
}

TransitionKernel transition_kernel(const WeightedGraph& w, int x) {
  const IsoradialGraph& g = w.graph();
  TransitionKernel t;
  const double d = w.diag[x];
  for (int slot = g.adj_offset[x]; slot < g.adj_offset[x + 1]; ++slot) {
    t.moves.emplace_back(g.adj_vertex[slot], w.adj_rho[slot] / d);
  }
  t.kill = w.mass2[x] / d;
  return t;
}

ModelBounds compute_model_bounds(const WeightedGraph& w,
                                 std::span<const double> potential_column_sums) {
  const IsoradialGraph& g = w.graph();
  ModelBounds b;
  b.epsilon = g.epsilon;
  b.c = std::numeric_limits<double>::infinity();
  b.c_prime = 0.0;
  b.delta = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t x = 0; x < w.size(); ++x) {
    if (!g.complete[x]) continue;
    any = true;
    b.c = std::min(b.c, w.diag[x]);
    b.c_prime = std::max(b.c_prime, w.diag[x]);
    b.delta = std::min(b.delta, w.mass2[x] / w.diag[x]);
  }
  if (!any) throw DomainError("model bounds: patch has no complete vertex");
  b.degenerate = w.params.k == 0.0 || b.delta <= 0.0;
  b.a_measured = 0.0;
  for (double s : potential_column_sums) b.a_measured = std::max(b.a_measured, s);
  b.a_analytic = b.degenerate ? std::numeric_limits<double>::infinity()
                              : b.c_prime / (b.c * b.delta);
  b.a = potential_column_sums.empty() ? b.a_analytic
                                      : std::min(b.a_measured, b.a_analytic);
  b.alpha = b.c_prime * b.a;
  b.beta = b.c;
  return b;
}

}  // namespace isosand
