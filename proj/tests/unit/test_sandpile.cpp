#include <gtest/gtest.h>

#include <cmath>
#include <deque>
#include <memory>
#include <numbers>

#include "isosand/errors.hpp"
#include "isosand/experiment.hpp"
#include "isosand/green.hpp"
#include "isosand/sandpile.hpp"

using namespace isosand;
using std::numbers::pi;

namespace {

const std::vector<double> kPenroseOffsets = {0.1302, 0.2716, 0.3519, 0.4288, 0.0611};

const WeightedGraph& square_w() {
  static const WeightedGraph w =
      weigh_graph(std::make_shared<IsoradialGraph>(build_square_lattice(60)), 0.5);
  return w;
}

const WeightedGraph& penrose_w() {
  static const WeightedGraph w = weigh_graph(
      std::make_shared<IsoradialGraph>(build_multigrid_tiling(5, kPenroseOffsets, 120.0)), 0.3);
  return w;
}

}  // namespace

TEST(Stabilize, BelowThresholdNothingTopples) {
  const auto& w = square_w();
  const int x0 = w.graph().origin;
  const auto st = stabilize(w, 0.99 * w.diag[x0], x0);
  EXPECT_EQ(st.total_topples, 0);
  EXPECT_TRUE(shape(st).empty());
  for (double u : st.odometer) EXPECT_EQ(u, 0.0);
  EXPECT_EQ(verify_odometer_identity(w, stabilize(w, 0.0, x0)), 0.0);
}

TEST(Stabilize, SingleToppleArithmetic) {
  const auto& w = penrose_w();
  const int x0 = w.graph().origin;
  const double N = 1.01 * w.diag[x0];
  const auto st = stabilize(w, N, x0);
  EXPECT_EQ(st.total_topples, 1);
  EXPECT_DOUBLE_EQ(st.amounts[x0], N - w.diag[x0]);
  EXPECT_EQ(shape(st), std::vector<int>{x0});
}

TEST(Stabilize, InvariantsOnBothBuilders) {
  for (const WeightedGraph* w : {&square_w(), &penrose_w()}) {
    const double N = 1e4;
    const auto st = stabilize(*w, N, w->graph().origin);
    EXPECT_TRUE(is_stable(*w, st));
    EXPECT_LT(mass_balance_error(*w, st), 1e-9 * N);
    EXPECT_LT(verify_odometer_identity(*w, st), 1e-8 * N);
    for (std::size_t x = 0; x < w->size(); ++x) {
      EXPECT_GE(st.amounts[x], 0.0);
      EXPECT_EQ(st.odometer[x], static_cast<double>(st.topples[x]) * w->diag[x]);
    }
  }
}

TEST(Stabilize, RandomOrdersAgree) {
  const auto& w = square_w();
  const auto ref = stabilize(w, 1e4, w.graph().origin);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto st = stabilize_random_order(w, 1e4, w.graph().origin, seed);
    EXPECT_LT(max_odometer_difference(ref, st), 1e-9) << seed;
    for (std::size_t x = 0; x < w.size(); ++x) {
      ASSERT_NEAR(st.amounts[x], ref.amounts[x], 1e-9);
    }
  }
}

TEST(Stabilize, BatchedAndParallelMatchReference) {
  for (const WeightedGraph* w : {&square_w(), &penrose_w()}) {
    const int x0 = w->graph().origin;
    const auto ref = stabilize(*w, 1e4, x0);
    EXPECT_LT(max_odometer_difference(ref, stabilize_batched(*w, 1e4, x0)), 1e-9);
    for (int workers : {1, 2, 4}) {
      const auto par = stabilize_parallel(*w, 1e4, x0, workers);
      EXPECT_LT(max_odometer_difference(ref, par), 1e-9) << workers;
      EXPECT_GT(par.rounds, 0);
    }
  }
}

TEST(Stabilize, OdometerMonotoneInN) {
  const auto& w = penrose_w();
  const int x0 = w.graph().origin;
  SandpileState prev = stabilize_batched(w, 100.0, x0);
  for (double N : {500.0, 2000.0, 8000.0}) {
    const auto st = stabilize_batched(w, N, x0);
    for (std::size_t x = 0; x < w.size(); ++x) ASSERT_LE(prev.odometer[x], st.odometer[x]);
    prev = st;
  }
}

TEST(Shape, ConnectedAndContainsOrigin) {
  for (const WeightedGraph* w : {&square_w(), &penrose_w()}) {
    const auto& g = w->graph();
    const auto st = stabilize_batched(*w, 3e3, g.origin);
    const auto members = shape(st);
    ASSERT_FALSE(members.empty());
    std::vector<char> in(w->size(), 0), seen(w->size(), 0);
    for (int x : members) in[x] = 1;
    ASSERT_TRUE(in[g.origin]);
    std::deque<int> queue{g.origin};
    seen[g.origin] = 1;
    std::size_t reached = 0;
    while (!queue.empty()) {
      const int x = queue.front();
      queue.pop_front();
      ++reached;
      for (int y : g.neighbours(x)) {
        if (in[y] && !seen[y]) {
          seen[y] = 1;
          queue.push_back(y);
        }
      }
    }
    EXPECT_EQ(reached, members.size());
  }
}

TEST(Stabilize, GuardsAndErrors) {
  const auto small = weigh_graph(std::make_shared<IsoradialGraph>(build_square_lattice(5)), 0.5);
  const int x0 = small.graph().origin;
  EXPECT_THROW(stabilize(small, 1e5, x0), RegionTooSmall);
  EXPECT_THROW(stabilize_parallel(small, 1e5, x0, 2), RegionTooSmall);
  EXPECT_THROW(stabilize(small, -1.0, x0), DomainError);
  EXPECT_THROW(stabilize_parallel(small, 10.0, x0, 0), DomainError);
  const auto massless =
      weigh_graph(std::make_shared<IsoradialGraph>(build_square_lattice(5)), 0.0);
  EXPECT_THROW(stabilize(massless, 10.0, x0), DomainError);
  StabilizeOptions capped;
  capped.max_topples = 10;
  EXPECT_THROW(stabilize(square_w(), 1e4, square_w().graph().origin, capped), NumericalError);
}

TEST(Threshold, SandwichAndShapeThresholdsHold) {
  const auto& w = square_w();
  const int x0 = w.graph().origin;
  const auto st = stabilize_batched(w, 1e3, x0);
  const auto green = solve_potential(w, x0);
  const auto bounds = compute_model_bounds(w, potential_column_sums(w));
  const auto report = verify_threshold(w, st, green, bounds);
  EXPECT_TRUE(report.passed());
  EXPECT_GT(report.checked, 0);
  EXPECT_LE(report.sandwich_max, 1e-10 * green.U[x0]);
  EXPECT_GE(report.sandwich_min_scaled, -report.alpha);
  // The origin is well inside: U(x0, x0) >= 1 > c / N.
  EXPECT_GE(green.U[x0], 1.0);
  EXPECT_GT(st.odometer[x0], 0.0);
}

TEST(Threshold, MismatchedOriginRejected) {
  const auto& w = square_w();
  const auto st = stabilize_batched(w, 100.0, w.graph().origin);
  const auto green = solve_potential(w, w.graph().neighbours(w.graph().origin)[0]);
  EXPECT_THROW(verify_threshold(w, st, green, compute_model_bounds(w, {})), DomainError);
}

TEST(BoundaryRadii, EmptyShapeGivesEmptyReport) {
  const auto& w = square_w();
  const auto st = stabilize(w, 1.0, w.graph().origin);
  const auto r = boundary_radii(w.graph(), st, lift_coordinates(w.graph()), 16);
  EXPECT_TRUE(r.plane.empty());
  EXPECT_TRUE(r.lifted.empty());
}

TEST(BoundaryRadii, SquareRadiiHaveDihedralSymmetry) {
  const auto& w = square_w();
  const auto lift = lift_coordinates(w.graph());
  const auto st = stabilize_batched(w, 1e4, w.graph().origin);
  const auto r = boundary_radii(w.graph(), st, lift, 8);
  ASSERT_EQ(r.plane.size(), 8u);
  for (int b = 0; b < 8; ++b) {
    EXPECT_EQ(r.plane[b].max_l1, r.plane[(b + 2) % 8].max_l1) << b;
    EXPECT_LE(r.plane[b].min_l1, r.plane[b].max_l1);
    EXPECT_GT(r.plane[b].members, 0);
  }
  for (const auto& cell : r.lifted) EXPECT_GT(cell.members, 0);
}

TEST(ShapeError, FiniteAndDecreasingWithN) {
  GraphSpec spec;
  double previous = 1e9;
  for (double N : {1e3, 1e4, 1e5}) {
    const auto sim = simulate_with_growth(spec, 0.5, N, Stabilizer::Batched);
    const auto err = limit_shape_error(sim.weights, sim.state, sim.lift, 16);
    ASSERT_FALSE(err.bins.empty());
    EXPECT_LT(err.max_error, previous) << N;
    EXPECT_GE(err.max_error, err.mean_error);
    previous = err.max_error;
  }
}

TEST(Experiment, PatchGrowsUntilShapeFits) {
  GraphSpec spec;
  spec.radius = 30;
  const auto sim = simulate_with_growth(spec, 0.5, 1e5, Stabilizer::Batched);
  EXPECT_GT(sim.growths, 0);
  EXPECT_GT(sim.spec.radius, 30);
  EXPECT_TRUE(is_stable(sim.weights, sim.state));
  spec.radius = 3;
  EXPECT_THROW(simulate_with_growth(spec, 0.5, 1e5, Stabilizer::Batched), RegionTooSmall);
  EXPECT_THROW(simulate_with_growth(spec, 0.0, 1e3, Stabilizer::Batched), DomainError);
}

TEST(Experiment, InitialRadiusFollowsLogN) {
  const auto p = complete_integrals(0.5);
  const double base = decay_bound_base(p, pi / 4);
  EXPECT_EQ(initial_patch_radius(p, pi / 4, 1e4, 0),
            static_cast<int>(std::ceil(std::log(1e4) / -std::log(base))));
  EXPECT_LT(initial_patch_radius(p, pi / 4, 1e3), initial_patch_radius(p, pi / 4, 1e5));
  EXPECT_THROW(initial_patch_radius(complete_integrals(0.0), pi / 4, 1e3), DomainError);
  EXPECT_EQ(parse_graph_kind("multigrid"), GraphKind::Multigrid);
  EXPECT_THROW(parse_graph_kind("hex"), DomainError);
}
