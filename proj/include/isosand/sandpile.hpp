#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "isosand/green.hpp"
#include "isosand/limitshape.hpp"
#include "isosand/weights.hpp"

namespace isosand {

struct SandpileState {
  std::vector<double> amounts;
  std::vector<double> odometer;       ///< topples * D
  std::vector<std::int64_t> topples;
  double N = 0.0;
  int x0 = 0;
  std::int64_t total_topples = 0;
  std::int64_t rounds = 0;  ///< parallel rounds (0 for the sequential kinds)
};

struct StabilizeOptions {
  /// A toppling vertex must lie farther than this from the patch boundary.
  int margin = 2;
  /// Cap on total topples; 0 means N / min m^2 + 1 (the finiteness bound).
  std::int64_t max_topples = 0;
};

/// Reference stabilizer: FIFO queue, one topple per pop. Throws
/// RegionTooSmall when a vertex within the margin would topple, DomainError
/// for k = 0 or N < 0, NumericalError when the topple cap is hit.
SandpileState stabilize(const WeightedGraph& w, double N, int x0,
                        const StabilizeOptions& opt = {});

/// Oracle: topples a uniformly random unstable vertex, one at a time.
SandpileState stabilize_random_order(const WeightedGraph& w, double N, int x0,
                                     std::uint64_t seed, const StabilizeOptions& opt = {});

/// FIFO queue, floor(s / D) topples per pop.
SandpileState stabilize_batched(const WeightedGraph& w, double N, int x0,
                                const StabilizeOptions& opt = {});

/// Synchronous rounds: every unstable vertex fires floor(s / D) topples and
/// each affected vertex pulls its inflow, so the result does not depend on
/// the thread schedule.
SandpileState stabilize_parallel(const WeightedGraph& w, double N, int x0, int workers,
                                 const StabilizeOptions& opt = {});

/// Vertices with positive odometer.
std::vector<int> shape(const SandpileState& state);

bool is_stable(const WeightedGraph& w, const SandpileState& state);

/// |sum amounts - (N - sum topples m^2)|.
double mass_balance_error(const WeightedGraph& w, const SandpileState& state);

/// max |T u - (f - N delta_x0)|.
double verify_odometer_identity(const WeightedGraph& w, const SandpileState& state);

/// Largest pointwise odometer difference.
double max_odometer_difference(const SandpileState& a, const SandpileState& b);

struct ThresholdReport {
  int checked = 0;
  double alpha = 0.0;
  double beta = 0.0;
  double c = 0.0;
  double c_prime = 0.0;
  // (i) 0 >= u/N - U(x0, x) >= -alpha/N
  int sandwich_violations = 0;
  double sandwich_max = 0.0;        ///< max of u/N - U (must be <= 0)
  double sandwich_min_scaled = 0.0; ///< min of N (u/N - U) (must be >= -alpha)
  // (ii) inside, (iii) outside, in the potential form used by the proof.
  int inner_violations_U = 0;
  int outer_violations_U = 0;
  // The same thresholds transferred to Gr through c Gr <= U <= c' Gr.
  int inner_violations_Gr = 0;  ///< Gr > alpha / (c N) outside the shape
  int outer_violations_Gr = 0;  ///< Gr < beta / (c' N) inside the shape
  // Literal Gr thresholds alpha / N and beta / N, reported only.
  int inner_violations_Gr_literal = 0;
  int outer_violations_Gr_literal = 0;
  std::vector<int> failing;  ///< first violating vertices of the gated checks

  bool passed() const {
    return sandwich_violations == 0 && inner_violations_U == 0 && outer_violations_U == 0 &&
           inner_violations_Gr == 0 && outer_violations_Gr == 0;
  }
};

/// Checks the threshold sandwich on the Green field's interior. The field
/// must come from the same weighted graph with origin x0.
ThresholdReport verify_threshold(const WeightedGraph& w, const SandpileState& state,
                                 const GreenField& green, const ModelBounds& bounds);

struct RadiusBin {
  double angle = 0.0;     ///< plane direction bin centre
  int members = 0;
  int outer_vertex = -1;  ///< member with the largest l1 lift norm
  double min_l1 = 0.0, max_l1 = 0.0;
  double min_plane = 0.0, max_plane = 0.0;
  double inner_l1 = 0.0;  ///< smallest l1 norm of a non-member in the bin
};

struct LiftRadiusCell {
  std::vector<int> key;  ///< reduced lift direction rounded to 1/resolution
  int members = 0;
  double min_l1 = 0.0, max_l1 = 0.0;
};

struct BoundaryRadii {
  std::vector<RadiusBin> plane;        ///< empty bins are absent
  std::vector<LiftRadiusCell> lifted;  ///< ordered by key
};

BoundaryRadii boundary_radii(const IsoradialGraph& g, const SandpileState& state,
                             const SurfaceLift& lift, int bins, int lift_resolution = 8);

struct ShapeErrorBin {
  double angle;
  int vertex;
  double l1_radius;         ///< |n(y*)|_1 of the outermost member
  double predicted_radius;  ///< 1 / (theta(u_s) . s) for s = n(y*) / |n|_1
  double relative_error;    ///< |l1_radius / log N - predicted| / predicted
};

struct ShapeError {
  double N = 0.0;
  std::vector<ShapeErrorBin> bins;
  double max_error = 0.0;
  double mean_error = 0.0;
};

/// Per plane-direction bin, compares the outermost shape member with the
/// predicted log N-scaled radius in its own lift direction.
ShapeError limit_shape_error(const WeightedGraph& w, const SandpileState& state,
                             const SurfaceLift& lift, int bins);

/// Plane radius a patch needs for N grains: the largest predicted plane
/// radius over the directions realised by the pilot patch g, times log N,
/// times `safety`, plus `margin`.
int predicted_patch_radius(const IsoradialGraph& g, const SurfaceLift& lift,
                           const ElliptParams& p, double N, double safety = 1.3,
                           int margin = 6);

}  // namespace isosand
