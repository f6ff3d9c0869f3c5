#include "isosand/experiment.hpp"

#include <cmath>

#include "isosand/angles.hpp"
#include "isosand/errors.hpp"
#include "isosand/green.hpp"

namespace isosand {

GraphKind parse_graph_kind(const std::string& name) {
  if (name == "square") return GraphKind::Square;
  if (name == "multigrid") return GraphKind::Multigrid;
  throw DomainError("unknown graph builder '" + name + "' (square|multigrid)");
}

std::string graph_kind_name(GraphKind kind) {
  return kind == GraphKind::Square ? "square" : "multigrid";
}

std::shared_ptr<const IsoradialGraph> build_graph(const GraphSpec& spec) {
  if (!(spec.radius > 0.0)) throw DomainError("graph radius must be positive");
  if (spec.kind == GraphKind::Square) {
    return std::make_shared<IsoradialGraph>(
        build_square_lattice(static_cast<int>(std::ceil(spec.radius))));
  }
  return std::make_shared<IsoradialGraph>(
      build_multigrid_tiling(spec.d, spec.offsets, spec.radius));
}

double builder_epsilon(const GraphSpec& spec) {
  return spec.kind == GraphKind::Square ? kPi / 4 : kPi / (2.0 * spec.d);
}

int initial_patch_radius(const ElliptParams& p, double epsilon, double N, int margin) {
  const double base = decay_bound_base(p, epsilon);
  if (!(base < 1.0)) throw DomainError("patch sizing needs k > 0");
  return static_cast<int>(std::ceil(std::log(std::max(N, 2.0)) / -std::log(base))) + margin;
}

Simulation simulate_with_growth(GraphSpec spec, double k, double N, Stabilizer method,
                                int workers, int max_growths, double growth,
                                const StabilizeOptions& opt) {
  if (!(k > 0.0 && k < 1.0)) throw DomainError("simulation needs 0 < k < 1");
  if (!(N >= 1.0)) throw DomainError("simulation needs N >= 1");
  if (!(spec.radius > 0.0)) {
    spec.radius = initial_patch_radius(complete_integrals(k), builder_epsilon(spec), N);
  }
  for (int attempt = 0;; ++attempt) {
    const auto g = build_graph(spec);
    WeightedGraph w = weigh_graph(g, k);
    try {
      SandpileState st;
      switch (method) {
        case Stabilizer::Fifo: st = stabilize(w, N, g->origin, opt); break;
        case Stabilizer::Batched: st = stabilize_batched(w, N, g->origin, opt); break;
        case Stabilizer::Parallel: st = stabilize_parallel(w, N, g->origin, workers, opt); break;
      }
      Simulation sim;
      sim.spec = spec;
      sim.lift = lift_coordinates(*g);
      sim.weights = std::move(w);
      sim.state = std::move(st);
      sim.growths = attempt;
      return sim;
    } catch (const RegionTooSmall&) {
      if (attempt >= max_growths) throw;
      spec.radius = std::ceil(spec.radius * growth);
    }
  }
}

}  // namespace isosand
