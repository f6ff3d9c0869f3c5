#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <boost/math/special_functions/ellint_1.hpp>
#include <boost/math/special_functions/jacobi_elliptic.hpp>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "dense_oracle.hpp"
#include "isosand/errors.hpp"
#include "isosand/green.hpp"

using namespace isosand;
using std::numbers::pi;

namespace {

const std::vector<double> kPenroseOffsets = {0.1302, 0.2716, 0.3519, 0.4288, 0.0611};

std::shared_ptr<const IsoradialGraph> square(int r) {
  return std::make_shared<IsoradialGraph>(build_square_lattice(r));
}

std::shared_ptr<const IsoradialGraph> penrose(double r) {
  return std::make_shared<IsoradialGraph>(build_multigrid_tiling(5, kPenroseOffsets, r));
}

// Primal vertex with the given lift (diamond coordinates), or -1.
int vertex_at(const IsoradialGraph& g, const SurfaceLift& lift, std::vector<int> n) {
  for (std::size_t x = 0; x < g.num_vertices(); ++x) {
    const auto c = lift.of(g.diamond_of_primal[x]);
    if (std::equal(c.begin(), c.end(), n.begin())) return static_cast<int>(x);
  }
  return -1;
}

// Least-squares fit of log Gr + log(L) / 2 = a + b L + c / L; returns b.
double fitted_slope(const std::vector<double>& L, const std::vector<double>& log_gr) {
  Eigen::MatrixXd A(L.size(), 3);
  Eigen::VectorXd y(L.size());
  for (std::size_t i = 0; i < L.size(); ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = L[i];
    A(i, 2) = 1.0 / L[i];
    y[i] = log_gr[i] + 0.5 * std::log(L[i]);
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
  return c[1];
}

}  // namespace

TEST(TruncationRadius, UnitToleranceNeedsNoMargin) {
  EXPECT_EQ(truncation_radius(complete_integrals(0.5), pi / 4, 1.0), 0);
}

TEST(TruncationRadius, MatchesDirectFormula) {
  const double k = 0.5;
  const double K = boost::math::ellint_1(k);
  double cn = 0, dn = 0;
  boost::math::jacobi_elliptic(k, K / 4, &cn, &dn);  // eps_ell / 2 with eps = pi/4
  const double base = std::sqrt(1 - k * k) / dn;
  EXPECT_NEAR(decay_bound_base(complete_integrals(k), pi / 4), base, 1e-14);
  const int expected = static_cast<int>(std::ceil(std::log(1e-12) / std::log(base)));
  EXPECT_EQ(truncation_radius(complete_integrals(k), pi / 4, 1e-12), expected);
  EXPECT_LT(std::pow(base, expected), 1e-12);
  EXPECT_GE(std::pow(base, expected - 1), 1e-12);
}

TEST(TruncationRadius, ShrinksAsModulusGrows) {
  int previous = truncation_radius(complete_integrals(0.05), pi / 10, 1e-12);
  for (double k : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const int r = truncation_radius(complete_integrals(k), pi / 10, 1e-12);
    EXPECT_LT(r, previous) << k;
    previous = r;
  }
}

TEST(TruncationRadius, MasslessCaseNeedsCap) {
  const auto p = complete_integrals(0.0);
  EXPECT_THROW(truncation_radius(p, pi / 4, 1e-12), DomainError);
  EXPECT_EQ(truncation_radius(p, pi / 4, 1e-12, 40), 40);
}

TEST(GreenSolve, SingleVertexRegionCountsOneVisit) {
  const auto w = weigh_graph(square(3), 0.5);
  std::vector<std::uint8_t> region(w.size(), 0);
  const int x0 = w.graph().origin;
  region[x0] = 1;
  for (auto method : {GreenMethod::ConjugateGradient, GreenMethod::NeumannSeries}) {
    const auto f = solve_potential(w, x0, region, method, 0);
    EXPECT_NEAR(f.U[x0], 1.0, 1e-14);
    EXPECT_NEAR(f.Gr[x0], 1.0 / w.diag[x0], 1e-15);
    for (std::size_t x = 0; x < w.size(); ++x) {
      if (static_cast<int>(x) != x0) EXPECT_EQ(f.U[x], 0.0);
    }
  }
}

TEST(GreenSolve, MatchesDenseInverseOnSmallPatches) {
  for (const auto& g : {square(2), square(3), penrose(3.0)}) {
    ASSERT_LE(g->num_vertices(), 30u);
    const auto w = weigh_graph(g, 0.5);
    const auto dense = oracle::dense_potentials(w);
    for (int x0 = 0; x0 < static_cast<int>(w.size()); ++x0) {
      for (auto method : {GreenMethod::ConjugateGradient, GreenMethod::NeumannSeries}) {
        const auto f = solve_potential(w, x0, {}, method, 0);
        for (std::size_t y = 0; y < w.size(); ++y) {
          EXPECT_NEAR(f.U[y], dense.U(x0, y), 1e-10 * dense.U(x0, x0));
          EXPECT_DOUBLE_EQ(f.Gr[y], f.U[y] / w.diag[y]);
        }
      }
    }
  }
}

TEST(DenseOracle, OperatorIdentitiesOnSmallPatch) {
  for (const auto& g : {square(3), penrose(3.0)}) {
    ASSERT_LE(g->num_vertices(), 30u);
    const auto w = weigh_graph(g, 0.5);
    const auto dense = oracle::dense_potentials(w);
    const int n = static_cast<int>(w.size());
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    EXPECT_LT((dense.T * dense.U.transpose() + I).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((dense.U.transpose() * dense.T + I).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((dense.Gr - dense.Gr.transpose()).cwiseAbs().maxCoeff(), 1e-10);
    const double c = oracle::diag(w).minCoeff();
    const double c_prime = oracle::diag(w).maxCoeff();
    for (int x = 0; x < n; ++x) {
      for (int y = 0; y < n; ++y) {
        EXPECT_GT(dense.U(x, y), 0.0);
        EXPECT_LE(c * dense.Gr(x, y), dense.U(x, y) * (1 + 1e-14));
        EXPECT_LE(dense.U(x, y), c_prime * dense.Gr(x, y) * (1 + 1e-14));
      }
    }
  }
}

TEST(DenseOracle, RowSumsBoundedByInverseKillRate) {
  const auto w = weigh_graph(square(3), 0.5);
  const auto dense = oracle::dense_potentials(w);
  double delta = 1.0;
  for (std::size_t x = 0; x < w.size(); ++x) delta = std::min(delta, w.mass2[x] / w.diag[x]);
  EXPECT_LE(dense.U.rowwise().sum().maxCoeff(), 1.0 / delta);
}

TEST(GreenSolve, ColumnSumsMatchDenseOracle) {
  const auto w = weigh_graph(penrose(3.0), 0.3);
  const auto dense = oracle::dense_potentials(w);
  const auto sums = potential_column_sums(w);
  const Eigen::VectorXd expected = dense.U.colwise().sum().transpose();
  for (std::size_t x = 0; x < w.size(); ++x) EXPECT_NEAR(sums[x], expected[x], 1e-10 * expected[x]);
}

TEST(GreenSolve, ConjugateGradientAgreesWithSeriesOnLargePatch) {
  for (const auto& [g, k] : {std::pair{square(70), 0.5}, std::pair{penrose(50.0), 0.5}}) {
    ASSERT_LE(g->num_vertices(), 10000u);
    const auto w = weigh_graph(g, k);
    const auto cv = cross_validate(w, g->origin);
    EXPECT_LT(cv.relative_difference, 1e-9);
    EXPECT_LT(cv.residual_cg, 1e-9);
    EXPECT_LT(cv.residual_series, 1e-9);
  }
}

TEST(GreenSolve, FieldIsPositiveAndPeakedAtOrigin) {
  const auto g = penrose(20.0);
  const auto w = weigh_graph(g, 0.5);
  const auto f = solve_potential(w, g->origin);
  EXPECT_LT(f.residual, 1e-9);
  EXPECT_GE(f.U[g->origin], 1.0);
  for (std::size_t x = 0; x < w.size(); ++x) {
    EXPECT_GT(f.U[x], 0.0);
    EXPECT_LE(f.Gr[x], f.Gr[g->origin]);
  }
}

TEST(GreenSolve, RegionSolveRejectsOriginOutside) {
  const auto w = weigh_graph(square(3), 0.5);
  std::vector<std::uint8_t> region(w.size(), 0);
  EXPECT_THROW(solve_potential(w, w.graph().origin, region), DomainError);
}

TEST(Asymptotics, LogSlopeAlongRaysMatchesDecayRate) {
  const auto g = square(80);
  const auto w = weigh_graph(g, 0.5);
  const auto lift = lift_coordinates(*g);
  const auto field = solve_potential(w, g->origin);
  // Axis (1, 0) and diagonal (1, 1) rays in lift coordinates.
  for (const std::vector<int> step : {std::vector<int>{2, 0}, std::vector<int>{1, 1}}) {
    std::vector<double> L, log_gr;
    for (int t = 1; t * (step[0] + step[1]) <= 40; ++t) {
      const int len = t * (step[0] + step[1]);
      if (len < 10) continue;
      const int y = vertex_at(*g, lift, {t * step[0], t * step[1]});
      ASSERT_GE(y, 0);
      L.push_back(len);
      log_gr.push_back(std::log(field.Gr[y]));
    }
    const std::vector<double> s(step.begin(), step.end());
    const auto prof = direction_profile(s, g->palette, w.params);
    const double slope = fitted_slope(L, log_gr);
    EXPECT_NEAR(slope / -prof.rate, 1.0, 0.03) << step[0] << "," << step[1];
    EXPECT_GT(prof.chi2_us, 0.0);
  }
}

TEST(Asymptotics, ExactOverAsymptoticRatioNearOne) {
  const auto g = square(80);
  const auto w = weigh_graph(g, 0.5);
  const auto lift = lift_coordinates(*g);
  const auto field = solve_potential(w, g->origin);
  for (const std::vector<int> n : {std::vector<int>{30, 0}, std::vector<int>{15, 15},
                                   std::vector<int>{20, 10}, std::vector<int>{0, -30}}) {
    const int y = vertex_at(*g, lift, n);
    ASSERT_GE(y, 0);
    const std::vector<double> s(n.begin(), n.end());
    const auto prof = direction_profile(s, g->palette, w.params);
    const double ratio = field.Gr[y] / asymptotic_green(w, lift, g->origin, y, prof);
    EXPECT_NEAR(ratio, 1.0, 0.2) << n[0] << "," << n[1];
    const auto params = asymptotic_params(prof);
    EXPECT_LT(params.chi_u0, 0.0);
    EXPECT_GT(params.chi2_u0, 0.0);
  }
}

TEST(Asymptotics, SecondDerivativeMatchesQuadraticFit) {
  const auto g = penrose(4.0);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> coord(0.05, 1.0);
  const auto p = complete_integrals(0.5);
  for (int trial = 0; trial < 5; ++trial) {
    // Nonnegative weights on three consecutive directions: admissible.
    std::vector<double> s(5, 0.0);
    for (int j = trial; j < trial + 3; ++j) s[j % 5] = coord(rng);
    const auto prof = direction_profile(s, g->palette, p);
    const double h = 5e-3 * p.K;
    Eigen::MatrixXd A(9, 3);
    Eigen::VectorXd y(9);
    for (int i = 0; i < 9; ++i) {
      const double du = (i - 4) * h / 4;
      A(i, 0) = 1.0;
      A(i, 1) = du;
      A(i, 2) = du * du;
      y[i] = chi(prof.u_s + du, prof.oriented, p);
    }
    const Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
    EXPECT_NEAR(2 * c[2] / prof.chi2_us, 1.0, 1e-4) << trial;
  }
}

TEST(DiscreteExponential, EmptyPathAndSingleStep) {
  const auto g = penrose(6.0);
  const auto w = weigh_graph(g, 0.5);
  const auto& p = w.params;
  const double u = 0.3 * p.K;
  const int x = g->diamond_of_primal[g->origin];
  EXPECT_EQ(discrete_exponential(w, x, x, u), std::complex<double>(1.0, 0.0));
  for (const auto& step : g->diamond_adj[x]) {
    const double natural = g->palette[step.direction] + (step.sign < 0 ? pi : 0.0);
    const double alpha = elliptic_angle(natural, p);
    const std::complex<double> expected(0.0, std::sqrt(p.k_prime) *
                                                  jacobi_ratio("sc", 0.5 * (u - alpha), p));
    const auto e = discrete_exponential(w, x, step.to, u);
    EXPECT_NEAR(std::abs(e - expected), 0.0, 1e-13 * std::abs(expected));
    // Walking back undoes the step.
    EXPECT_NEAR(std::abs(e * discrete_exponential(w, step.to, x, u) - 1.0), 0.0, 1e-13);
  }
}

TEST(DiscreteExponential, PathIndependenceOnRandomPairs) {
  const auto g = penrose(12.0);
  const auto w = weigh_graph(g, 0.5);
  const auto lift = lift_coordinates(*g);
  const double u = 0.3 * w.params.K;
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(g->num_diamond_vertices()) - 1);
  int distinct_paths = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int x = pick(rng);
    const int y = pick(rng);
    const auto p1 = diamond_path(*g, x, y, 1);
    const auto p2 = diamond_path(*g, x, y, 2);
    if (p1 != p2) ++distinct_paths;
    const auto e1 = discrete_exponential_along(w, p1, u);
    const auto e2 = discrete_exponential_along(w, p2, u);
    const auto e3 = discrete_exponential_from_lift(w, lift, x, y, u);
    EXPECT_LT(std::abs(e1 - e2), 1e-10 * std::abs(e1)) << x << "->" << y;
    EXPECT_LT(std::abs(e1 - e3), 1e-10 * std::abs(e1)) << x << "->" << y;
  }
  EXPECT_GT(distinct_paths, 25);
}
