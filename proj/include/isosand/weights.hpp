#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "isosand/elliptic.hpp"
#include "isosand/isograph.hpp"

namespace isosand {

/// Isoradial graph with elliptic conductances and masses.
///
/// Boundary vertices of a finite patch keep only their existing edges, so
/// their D (and mass) is the truncated sum; the finite operators are then
/// exact for the finite graph.
struct WeightedGraph {
  std::shared_ptr<const IsoradialGraph> base;
  ElliptParams params;
  std::vector<double> rho;      // per primal edge
  std::vector<double> adj_rho;  // aligned with base->adj_vertex (CSR)
  std::vector<double> mass2;
  std::vector<double> diag;

  const IsoradialGraph& graph() const { return *base; }
  std::size_t size() const { return diag.size(); }
};

/// rho_e = sc(theta_e | k), the elliptic angle of the half-angle theta_bar.
double conductance(const PrimalEdge& e, const ElliptParams& p);

/// m^2(x) = sum over incident edges of (A - sc)(theta_e | k).
double vertex_mass_squared(const IsoradialGraph& g, int x, const ElliptParams& p);

/// Attaches weights for modulus k. Masses are evaluated once per distinct
/// half-angle.
WeightedGraph weigh_graph(std::shared_ptr<const IsoradialGraph> g, double k);

/// Optional vertex mask: functions vanish outside it (Dirichlet zero) while
/// D keeps its full value, so a walk leaving the region is killed. An empty
/// mask means the whole graph.
using RegionMask = std::span<const std::uint8_t>;

// OpenMP kernels. Outputs are resized; inputs and outputs must not alias.
void laplacian_apply(const WeightedGraph& w, std::span<const double> f,
                     std::vector<double>& out, RegionMask region = {});
/// (Tf)(x) = sum_y rho(xy) f(y) / D(y) - f(x).
void operator_T_apply(const WeightedGraph& w, std::span<const double> f,
                      std::vector<double>& out, RegionMask region = {});
/// (Tf)^T: (T^T f)(x) = sum_y rho(xy) f(y) / D(x) - f(x).
void operator_T_transpose_apply(const WeightedGraph& w, std::span<const double> f,
                                std::vector<double>& out, RegionMask region = {});

/// Serial reference versions of the kernels above.
namespace serial {
void laplacian_apply(const WeightedGraph& w, std::span<const double> f,
                     std::vector<double>& out, RegionMask region = {});
void operator_T_apply(const WeightedGraph& w, std::span<const double> f,
                      std::vector<double>& out, RegionMask region = {});
void operator_T_transpose_apply(const WeightedGraph& w, std::span<const double> f,
                                std::vector<double>& out, RegionMask region = {});
}  // namespace serial

struct TransitionKernel {
  std::vector<std::pair<int, double>> moves;  // (neighbour, probability)
  double kill;
};

TransitionKernel transition_kernel(const WeightedGraph& w, int x);

struct ModelBounds {
  double epsilon = 0.0;
  double c = 0.0;
  double c_prime = 0.0;
  double delta = 0.0;
  double a = 0.0;           ///< min(a_measured, a_analytic)
  double a_measured = 0.0;  ///< max_x sum_y U(y, x) on the patch
  double a_analytic = 0.0;  ///< c' / (c delta), geometric-series bound
  double alpha = 0.0;       ///< c' a
  double beta = 0.0;        ///< c
  bool degenerate = false;  ///< k = 0: no killing, thresholds undefined
};

/// c, c', delta over complete vertices (truncated boundary vertices carry
/// artificial weights); a from the column sums sum_y U(y, x) supplied by the
/// green module, maximised over every vertex.
ModelBounds compute_model_bounds(const WeightedGraph& w,
                                 std::span<const double> potential_column_sums);

}  // namespace isosand
