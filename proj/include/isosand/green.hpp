#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "isosand/limitshape.hpp"
#include "isosand/weights.hpp"

namespace isosand {

/// k' nd(eps_ell / 2 | k): the per-step decay base of the exponential bound.
double decay_bound_base(const ElliptParams& p, double epsilon);

/// Smallest R with base^R < tol, R = ceil(log tol / log base). At k = 0
/// there is no exponential bound: `massless_cap` is returned when given
/// (>= 0), otherwise DomainError.
int truncation_radius(const ElliptParams& p, double epsilon, double tol,
                      int massless_cap = -1);

struct SolverOptions {
  double tolerance = 1e-14;  ///< relative residual (CG) or tail mass (series)
  /// 0: 20 * region size, at least 10000; the series also allows twice the
  /// length implied by the bulk kill rate.
  int max_iterations = 0;
};

struct SolveStats {
  int iterations = 0;
  double residual = 0.0;  ///< max-abs residual of the defining equation
};

/// Conjugate gradient for Delta^m g = rhs on the region (Dirichlet zero
/// outside). Throws NumericalError with the residual on non-convergence.
std::vector<double> solve_massive_laplacian(const WeightedGraph& w,
                                            std::span<const double> rhs,
                                            RegionMask region = {},
                                            const SolverOptions& opt = {},
                                            SolveStats* stats = nullptr);

/// U(x0, .) by summing the killed walk's occupation measures,
/// v_{n+1}(y) = sum_x v_n(x) P(x, y), v_0 = delta_x0.
std::vector<double> potential_row_series(const WeightedGraph& w, int x0,
                                         RegionMask region = {},
                                         const SolverOptions& opt = {},
                                         SolveStats* stats = nullptr);

/// Column sums sum_y U(y, x) = D(x) (Delta^-1 1)(x), one solve.
std::vector<double> potential_column_sums(const WeightedGraph& w,
                                          RegionMask region = {});

enum class GreenMethod { ConjugateGradient, NeumannSeries };

struct GreenField {
  int origin = 0;
  std::vector<std::uint8_t> region;    ///< empty: whole patch
  std::vector<std::uint8_t> interior;  ///< checks restricted here
  std::vector<double> U;
  std::vector<double> Gr;
  int truncation_radius = 0;  ///< patch boundary distance from the origin
  double residual = 0.0;      ///< max |Delta^m Gr - delta_x0| over interior
  int iterations = 0;
  GreenMethod method = GreenMethod::ConjugateGradient;
};

/// Solves for U(x0, .) and Gr(x0, .) = U / D. Interior: region vertices at
/// primal distance > interior_margin from the patch and region boundaries.
GreenField solve_potential(const WeightedGraph& w, int x0,
                           std::span<const std::uint8_t> region = {},
                           GreenMethod method = GreenMethod::ConjugateGradient,
                           int interior_margin = 2, const SolverOptions& opt = {});

struct CrossValidation {
  double relative_difference;  ///< max |U_cg - U_series| / max |U_cg| on interior
  double residual_cg;
  double residual_series;
  int iterations_cg;
  int iterations_series;
};

CrossValidation cross_validate(const WeightedGraph& w, int x0,
                               std::span<const std::uint8_t> region = {},
                               int interior_margin = 2);

struct AsymptoticGreenParams {
  std::vector<double> direction;
  double u0 = 0.0;
  double chi_u0 = 0.0;   ///< -theta(u0) . s < 0
  double chi2_u0 = 0.0;  ///< > 0
};

AsymptoticGreenParams asymptotic_params(const DirectionProfile& profile);

/// k' exp(-n . theta(u0)) / (2 sqrt(2 pi |n|_1 chi''(u0))) with
/// n = n(y) - n(x0) for primal vertices x0, y.
double asymptotic_green(const WeightedGraph& w, const SurfaceLift& lift, int x0, int y,
                        const DirectionProfile& profile);

/// Shortest diamond-graph path a -> b (diamond vertex indices), ties broken
/// at random by the seed; seed 0 keeps adjacency order.
std::vector<int> diamond_path(const IsoradialGraph& g, int a, int b,
                              std::uint64_t seed = 0);

/// Product of i sqrt(k') sc((u - alpha)/2) over the steps of the path, alpha
/// the elliptic angle of each step's full orientation.
std::complex<double> discrete_exponential_along(const WeightedGraph& w,
                                                std::span<const int> path, double u);

/// e_(x, y)(u) for diamond vertices x, y along one minimal path.
std::complex<double> discrete_exponential(const WeightedGraph& w, int x, int y, double u,
                                          std::uint64_t seed = 0);

/// The same product grouped by direction through the lift: factor_j raised
/// to n_j(y) - n_j(x).
std::complex<double> discrete_exponential_from_lift(const WeightedGraph& w,
                                                    const SurfaceLift& lift, int x, int y,
                                                    double u);

}  // namespace isosand
