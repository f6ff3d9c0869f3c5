#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace isosand {

using Point = std::complex<double>;

/// One step of the diamond graph: sign * exp(i * palette[direction]).
struct DiamondStep {
  int to;
  int direction;
  int sign;
};

/// Primal edge u -> v, the diagonal of one unit rhombus.
///
/// `theta_bar` is the rhombus half-angle at the primal endpoints;
/// `alpha_bar` is the direction of the rhombus side leaving u clockwise from
/// the edge, so that arg(v - u) = alpha_bar + theta_bar.
struct PrimalEdge {
  int u;
  int v;
  double theta_bar;
  double alpha_bar;
};

/// Finite patch of a quasicrystalline isoradial graph together with its
/// diamond graph. The plane embedding is translated so that the origin
/// vertex sits at 0.
class IsoradialGraph {
 public:
  std::string builder;
  double radius = 0.0;

  /// Diamond directions in [0, pi); steps carry explicit signs.
  std::vector<double> palette;
  double epsilon = 0.0;
  int origin = 0;

  // Primal graph.
  std::vector<Point> position;
  std::vector<PrimalEdge> edges;
  std::vector<int> adj_offset;  // CSR over primal vertices
  std::vector<int> adj_vertex;
  std::vector<int> adj_edge;
  /// Rhombus angles around the vertex sum to 2 pi.
  std::vector<std::uint8_t> complete;
  /// Primal graph distance to the nearest incomplete vertex.
  std::vector<int> boundary_distance;

  // Diamond graph (primal and dual vertices).
  std::vector<Point> diamond_position;
  std::vector<int> diamond_of_primal;
  std::vector<int> primal_of_diamond;  // -1 for dual vertices
  std::vector<std::vector<DiamondStep>> diamond_adj;
  /// Rhombi as diamond indices (p, d, p', d') in counterclockwise order.
  std::vector<std::array<int, 4>> rhombi;

  /// Integer multigrid coordinates per diamond vertex (multigrid builder
  /// only); an independent record of the lift for cross-checks.
  std::vector<std::vector<int>> tiling_key;

  int d() const { return static_cast<int>(palette.size()); }
  std::size_t num_vertices() const { return position.size(); }
  std::size_t num_diamond_vertices() const { return diamond_position.size(); }

  std::span<const int> neighbours(int x) const {
    return {adj_vertex.data() + adj_offset[x],
            static_cast<std::size_t>(adj_offset[x + 1] - adj_offset[x])};
  }
  std::span<const int> incident_edges(int x) const {
    return {adj_edge.data() + adj_offset[x],
            static_cast<std::size_t>(adj_offset[x + 1] - adj_offset[x])};
  }
  int degree(int x) const { return adj_offset[x + 1] - adj_offset[x]; }

  /// Vertices whose primal distance to the patch boundary exceeds `margin`.
  std::vector<int> interior(int margin) const;
};

/// Rhombic tiling patch: the raw material both builders produce.
struct RhombicPatch {
  std::vector<Point> vertex;
  std::vector<std::uint8_t> primal;  // bipartition class
  std::vector<std::array<int, 4>> rhombi;  // counterclockwise corners
  std::vector<std::vector<int>> key;
  std::vector<double> palette;
  int origin = 0;  // a primal vertex
};

/// Turns a rhombic tiling patch into an isoradial graph: primal edges are the
/// primal diagonals of the rhombi. Drops pieces disconnected from the origin
/// and validates the rhombus geometry.
IsoradialGraph assemble_isoradial(RhombicPatch patch, std::string builder,
                                  double radius);

/// Z^2 as an isoradial graph: diamond vertices Z^2, primal vertices the even
/// sublattice, all primal vertices within primal graph distance `radius`.
IsoradialGraph build_square_lattice(int radius);

/// de Bruijn multigrid tiling with grid directions exp(i pi j / d) and the
/// given offsets, cut to the plane disc of `radius` around the origin vertex.
/// Throws StructuralError for offsets producing a triple intersection.
IsoradialGraph build_multigrid_tiling(int d, std::span<const double> offsets,
                                      double radius);

/// Lift of the diamond graph onto the monotone surface in Z^d.
struct SurfaceLift {
  int d = 0;
  std::vector<int> coords;  // row-major, num_diamond_vertices x d
  std::vector<int> norm1;

  std::span<const int> of(int diamond_vertex) const {
    return {coords.data() + static_cast<std::size_t>(diamond_vertex) * d,
            static_cast<std::size_t>(d)};
  }
  /// n(y) / ||n(y)||_1 (zero vector at the origin).
  std::vector<double> reduced(int diamond_vertex) const;
};

/// Breadth-first signed step counting from the origin. Every non-tree edge is
/// checked; an inconsistent cycle throws StructuralError.
SurfaceLift lift_coordinates(const IsoradialGraph& g);

/// pi(x) = sum_j x_j exp(i palette_j).
Point project(std::span<const double> x, std::span<const double> palette);
Point project(std::span<const int> x, std::span<const double> palette);

struct BilipschitzReport {
  double lower;  ///< certified delta: delta ||n||_1 <= |pi(n)| for all vertices
  double upper;  ///< always 1
  double worst_ratio;  ///< min over vertices of |pi(n)| / ||n||_1
};

/// Checks delta ||n(y)||_1 <= |pi(n(y))| <= ||n(y)||_1 over all diamond
/// vertices, delta = min cos of the reoriented support angles. Throws
/// InvariantViolation naming the offending vertex on failure.
BilipschitzReport bilipschitz_constants(const IsoradialGraph& g,
                                        const SurfaceLift& lift);

/// Reduced coordinates of all diamond vertices with r1 <= ||n||_1 <= r2,
/// deduplicated within `tolerance` in l1 distance.
std::vector<std::vector<double>> admissible_directions_estimate(
    const IsoradialGraph& g, const SurfaceLift& lift, double r1, double r2,
    double tolerance = 1e-9);

struct FlatnessBin {
  double angle;  ///< bin centre, plane direction
  std::vector<double> direction;  ///< n(v) estimate from the outermost annulus
  double spread;  ///< max pairwise l1 distance of the annulus means
  int annuli_hit;
};

struct FlatnessReport {
  std::vector<FlatnessBin> bins;
  double max_spread;
};

/// Bins diamond vertices by plane direction; within each annulus [r1, r2]
/// (plane radius) averages reduced coordinates and reports their spread.
FlatnessReport check_asymptotic_flatness(
    const IsoradialGraph& g, const SurfaceLift& lift, int direction_bins,
    std::span<const std::array<double, 2>> annuli);

}  // namespace isosand
