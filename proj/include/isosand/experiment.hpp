#pragma once

#include <memory>
#include <string>
#include <vector>

#include "isosand/sandpile.hpp"

namespace isosand {

enum class GraphKind { Square, Multigrid };

struct GraphSpec {
  GraphKind kind = GraphKind::Square;
  int d = 5;                    ///< multigrid only
  std::vector<double> offsets;  ///< multigrid only, one per grid
  double radius = 0.0;          ///< <= 0: sized from N by initial_patch_radius
};

GraphKind parse_graph_kind(const std::string& name);
std::string graph_kind_name(GraphKind kind);

/// Throws DomainError for a malformed spec, StructuralError from the builder.
std::shared_ptr<const IsoradialGraph> build_graph(const GraphSpec& spec);

/// Angle bound of the builder without building: pi/4 for the square lattice,
/// pi/(2d) for a d-grid multigrid.
double builder_epsilon(const GraphSpec& spec);

/// log N / |log(k' nd(eps_ell / 2))| + margin, the log N growth scale.
int initial_patch_radius(const ElliptParams& p, double epsilon, double N, int margin = 6);

enum class Stabilizer { Fifo, Batched, Parallel };

struct Simulation {
  GraphSpec spec;  ///< with the radius finally used
  WeightedGraph weights;
  SurfaceLift lift;
  SandpileState state;
  int growths = 0;
};

/// Builds, weighs and stabilizes; on RegionTooSmall the radius is multiplied
/// by `growth` up to `max_growths` times before the error is rethrown.
Simulation simulate_with_growth(GraphSpec spec, double k, double N, Stabilizer method,
                                int workers = 1, int max_growths = 3, double growth = 1.5,
                                const StabilizeOptions& opt = {});

}  // namespace isosand
