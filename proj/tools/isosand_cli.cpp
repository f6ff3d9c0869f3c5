// Command-line driver: graph building, weights, Green functions, sandpile
// simulation, limit-shape comparison and invariant checks.

#include <fmt/format.h>

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>
#include <set>

#include "isosand/errors.hpp"
#include "isosand/experiment.hpp"
#include "isosand/green.hpp"
#include "isosand/io.hpp"

namespace fs = std::filesystem;
using namespace isosand;

namespace {

enum Exit { kOk = 0, kInvariant = 1, kUsage = 2, kNumerical = 3 };

struct Config {
  std::string graph = "square";
  int d = 5;
  std::vector<double> offsets;
  double radius = 0.0;
  int workers = 1;
  std::vector<double> k = {0.5};
  std::vector<double> N = {1e4};
  std::uint64_t seed = 1;
  std::string out_root = "isosand-out";
  std::string name;
  std::vector<std::string> emit = {"csv", "json", "svg"};
  int bins = 32;
  std::string stabilizer = "batched";
  bool green = false;
  bool cross_check = false;
  bool soft_fail = false;
  double tol = 1e-12;
  int max_growths = 3;
  double max_radius = 2000.0;
  std::vector<double> circle_k;
};

bool emits(const Config& c, const std::string& what) {
  return std::find(c.emit.begin(), c.emit.end(), what) != c.emit.end();
}

GraphSpec graph_spec(const Config& c) {
  GraphSpec s;
  s.kind = parse_graph_kind(c.graph);
  s.d = c.d;
  s.radius = c.radius;
  s.offsets = c.offsets;
  if (s.kind == GraphKind::Multigrid && s.offsets.empty()) {
    // Generic offsets drawn from the seed.
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int j = 0; j < c.d; ++j) s.offsets.push_back(u(rng));
  }
  return s;
}

Stabilizer parse_stabilizer(const std::string& s) {
  if (s == "fifo") return Stabilizer::Fifo;
  if (s == "batched") return Stabilizer::Batched;
  if (s == "parallel") return Stabilizer::Parallel;
  throw DomainError("unknown stabilizer '" + s + "' (fifo|batched|parallel)");
}

std::string tag(double k, double N) {
  return fmt::format("k{}_N{}", io::format_number(k), io::format_number(N));
}

fs::path out_dir(const Config& c, const std::string& command) {
  return fs::path(c.out_root) / (c.name.empty() ? command : c.name);
}

void require_positive_k(const Config& c) {
  for (double k : c.k) {
    if (!(k > 0.0 && k < 1.0)) {
      throw DomainError(fmt::format("k = {} not allowed here: need 0 < k < 1", k));
    }
  }
  for (double N : c.N) {
    if (!(N >= 1.0)) throw DomainError(fmt::format("N = {} must be >= 1", N));
  }
}

double plane_extent(const IsoradialGraph& g) {
  double r = 0.0;
  for (const auto& z : g.diamond_position) r = std::max(r, std::abs(z));
  return r;
}

ShapeCurve predicted_curve(const IsoradialGraph& g, const SurfaceLift& lift, double k,
                           int bins) {
  const double r = plane_extent(g);
  return predicted_plane_shape(g, lift, complete_integrals(k), bins, {0.4 * r, 0.6 * r});
}

std::string check_line(bool ok, const std::string& what) {
  return fmt::format("[{}] {}", ok ? "PASS" : "FAIL", what);
}

// ---------------------------------------------------------------- commands

int cmd_build(const Config& c) {
  GraphSpec spec = graph_spec(c);
  if (!(spec.radius > 0.0)) throw DomainError("build-graph needs --radius > 0");
  const auto g = build_graph(spec);
  const auto lift = lift_coordinates(*g);
  const auto diag = io::graph_diagnostics(*g, lift);
  std::vector<WeightedGraph> ws;
  for (double k : c.k) ws.push_back(weigh_graph(g, k));
  std::vector<const WeightedGraph*> ptrs;
  for (const auto& w : ws) ptrs.push_back(&w);
  const fs::path dir = out_dir(c, "build-graph");
  io::write_json(dir / "graph.json", io::graph_json(*g, lift, diag, ptrs));
  fmt::print("graph {} d={} vertices={} edges={} epsilon={} delta={} flatness_spread={}\n",
             g->builder, g->d(), g->num_vertices(), g->edges.size(), g->epsilon,
             diag.bilipschitz.lower, diag.flatness.max_spread);
  fmt::print("wrote {}\n", (dir / "graph.json").string());
  return kOk;
}

int cmd_weights(const Config& c) {
  GraphSpec spec = graph_spec(c);
  if (!(spec.radius > 0.0)) throw DomainError("weights needs --radius > 0");
  const auto g = build_graph(spec);
  const auto lift = lift_coordinates(*g);
  std::vector<WeightedGraph> ws;
  nlohmann::json report = {{"schema_version", io::kSchemaVersion}, {"weights", nlohmann::json::object()}};
  for (double k : c.k) {
    ws.push_back(weigh_graph(g, k));
    const auto& w = ws.back();
    const auto b = compute_model_bounds(w, {});
    const auto [rmin, rmax] = std::minmax_element(w.rho.begin(), w.rho.end());
    fmt::print("k={} rho=[{}, {}] c={} c'={} delta={}{}\n", k, *rmin, *rmax, b.c, b.c_prime,
               b.delta, b.degenerate ? " (degenerate: no killing)" : "");
    report["weights"][io::format_number(k)] = {
        {"rho_min", *rmin}, {"rho_max", *rmax}, {"c", b.c}, {"c_prime", b.c_prime},
        {"delta", b.delta}, {"degenerate", b.degenerate}};
  }
  const fs::path dir = out_dir(c, "weights");
  if (emits(c, "json")) {
    std::vector<const WeightedGraph*> ptrs;
    for (const auto& w : ws) ptrs.push_back(&w);
    io::write_json(dir / "graph.json", io::graph_json(*g, lift, io::graph_diagnostics(*g, lift), ptrs));
    io::write_json(dir / "weights_report.json", report);
  }
  return kOk;
}

int cmd_green(const Config& c) {
  const fs::path dir = out_dir(c, "green");
  nlohmann::json report = {{"schema_version", io::kSchemaVersion}, {"runs", nlohmann::json::array()}};
  int status = kOk;
  for (double k : c.k) {
    GraphSpec spec = graph_spec(c);
    const auto p = complete_integrals(k);
    const int trunc = truncation_radius(p, builder_epsilon(spec), c.tol, static_cast<int>(spec.radius));
    if (!(spec.radius > 0.0)) spec.radius = trunc;
    if (k == 0.0) {
      fmt::print(stderr, "warning: k = 0 has no exponential decay; using the patch edge as an "
                         "absorbing boundary\n");
    }
    const auto g = build_graph(spec);
    const auto w = weigh_graph(g, k);
    const auto lift = lift_coordinates(*g);
    std::vector<std::uint8_t> region;
    if (k == 0.0) {
      region.assign(w.size(), 0);
      for (std::size_t x = 0; x < w.size(); ++x) region[x] = g->boundary_distance[x] > 0;
    }
    const auto field = solve_potential(w, g->origin, region);
    nlohmann::json run = {{"k", k},
                          {"radius", spec.radius},
                          {"vertices", w.size()},
                          {"truncation_radius", trunc},
                          {"residual", field.residual},
                          {"iterations", field.iterations},
                          {"U_origin", field.U[g->origin]}};
    fmt::print("k={} radius={} vertices={} residual={:.3g} iterations={}\n", k, spec.radius,
               w.size(), field.residual, field.iterations);
    if (field.residual >= 1e-9) status = kNumerical;
    if (c.cross_check) {
      const auto cv = cross_validate(w, g->origin, region);
      run["cross_validation"] = {{"relative_difference", cv.relative_difference},
                                 {"residual_series", cv.residual_series},
                                 {"iterations_series", cv.iterations_series}};
      fmt::print("  conjugate gradient vs series: relative difference {:.3g}\n",
                 cv.relative_difference);
      if (cv.relative_difference >= 1e-9) status = kNumerical;
    }
    if (emits(c, "csv")) {
      io::write_text(dir / fmt::format("green_k{}.csv", io::format_number(k)),
                     io::green_csv(*g, lift, field));
    }
    report["runs"].push_back(std::move(run));
  }
  if (emits(c, "json")) io::write_json(dir / "green_report.json", report);
  return status;
}

struct SimOutcome {
  Simulation sim;
  nlohmann::json report;
  bool ok = true;
};

SimOutcome run_simulation(const Config& c, double k, double N, const fs::path& dir,
                          bool with_green) {
  const auto t0 = std::chrono::steady_clock::now();
  SimOutcome o;
  GraphSpec spec = graph_spec(c);
  const double start = spec.radius > 0.0 ? spec.radius
                                         : initial_patch_radius(complete_integrals(k),
                                                                builder_epsilon(spec), N);
  if (start > c.max_radius) {
    throw DomainError(fmt::format("k={} N={} needs a patch of radius {} > --max-radius {}", k, N,
                                  start, c.max_radius));
  }
  o.sim = simulate_with_growth(spec, k, N, parse_stabilizer(c.stabilizer), c.workers,
                               c.max_growths);
  const auto& w = o.sim.weights;
  const auto& g = w.graph();
  const auto& st = o.sim.state;
  const double mass = mass_balance_error(w, st);
  const double identity = verify_odometer_identity(w, st);
  const bool stable = is_stable(w, st);
  o.ok = stable && mass < 1e-9 * N && identity < 1e-8 * N;
  o.report = {{"k", k},
              {"N", N},
              {"radius", o.sim.spec.radius},
              {"growths", o.sim.growths},
              {"vertices", w.size()},
              {"total_topples", st.total_topples},
              {"shape_size", shape(st).size()},
              {"stable", stable},
              {"mass_balance_error", mass},
              {"odometer_identity_residual", identity}};
  fmt::print("k={} N={} radius={} (growths {}) topples={} shape={} mass_err={:.3g} "
             "identity={:.3g} {}\n",
             k, N, o.sim.spec.radius, o.sim.growths, st.total_topples, shape(st).size(), mass,
             identity, o.ok ? "ok" : "INVARIANT FAILURE");
  if (with_green) {
    const auto field = solve_potential(w, st.x0);
    const auto bounds = compute_model_bounds(w, potential_column_sums(w));
    const auto th = verify_threshold(w, st, field, bounds);
    o.report["threshold"] = {{"passed", th.passed()},
                             {"checked", th.checked},
                             {"alpha", th.alpha},
                             {"beta", th.beta},
                             {"sandwich_violations", th.sandwich_violations},
                             {"inner_violations", th.inner_violations_U + th.inner_violations_Gr},
                             {"outer_violations", th.outer_violations_U + th.outer_violations_Gr},
                             {"literal_Gr_inner_violations", th.inner_violations_Gr_literal},
                             {"literal_Gr_outer_violations", th.outer_violations_Gr_literal}};
    fmt::print("  threshold: {} vertices checked, {}\n", th.checked,
               th.passed() ? "all thresholds hold" : "VIOLATIONS");
    o.ok = o.ok && th.passed();
  }
  const std::string t = tag(k, N);
  if (emits(c, "csv")) {
    io::write_text(dir / fmt::format("state_{}.csv", t), io::state_csv(g, o.sim.lift, st));
  }
  if (emits(c, "svg")) {
    const auto curve = predicted_curve(g, o.sim.lift, k, c.bins);
    const auto predicted = io::predicted_boundary(curve, std::log(N));
    const auto empirical = io::empirical_boundary(g, st, c.bins);
    io::write_text(dir / fmt::format("amount_{}.svg", t),
                   io::heatmap_svg(g, st.amounts, "amount " + t, predicted, empirical));
    io::write_text(dir / fmt::format("odometer_{}.svg", t),
                   io::heatmap_svg(g, st.odometer, "odometer " + t, predicted, empirical));
  }
  o.report["seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return o;
}

int cmd_simulate(const Config& c) {
  require_positive_k(c);
  const fs::path dir = out_dir(c, "simulate");
  nlohmann::json report = {{"schema_version", io::kSchemaVersion}, {"runs", nlohmann::json::array()}};
  bool ok = true;
  for (double k : c.k) {
    for (double N : c.N) {
      auto o = run_simulation(c, k, N, dir, c.green);
      ok = ok && o.ok;
      report["runs"].push_back(std::move(o.report));
    }
  }
  if (emits(c, "json")) io::write_json(dir / "simulate_report.json", report);
  return ok ? kOk : kInvariant;
}

int cmd_limit_shape(const Config& c) {
  require_positive_k(c);
  const fs::path dir = out_dir(c, "limit-shape");
  nlohmann::json report = {{"schema_version", io::kSchemaVersion}, {"moduli", nlohmann::json::array()}};
  bool trend_ok = true;
  bool invariants_ok = true;
  for (double k : c.k) {
    std::vector<ShapeError> errors;
    for (double N : c.N) {
      Config quiet = c;
      quiet.emit.erase(std::remove(quiet.emit.begin(), quiet.emit.end(), "svg"), quiet.emit.end());
      quiet.emit.erase(std::remove(quiet.emit.begin(), quiet.emit.end(), "csv"), quiet.emit.end());
      auto o = run_simulation(quiet, k, N, dir, false);
      invariants_ok = invariants_ok && o.ok;
      const auto& g = o.sim.weights.graph();
      errors.push_back(limit_shape_error(o.sim.weights, o.sim.state, o.sim.lift, c.bins));
      const auto curve = predicted_curve(g, o.sim.lift, k, c.bins);
      const std::string t = tag(k, N);
      if (emits(c, "csv")) {
        io::write_text(dir / fmt::format("shape_curve_{}.csv", t), io::shape_curve_csv(curve, g.d()));
      }
      if (emits(c, "svg")) {
        io::write_text(dir / fmt::format("overlay_{}.svg", t),
                       io::overlay_svg(g, o.sim.state, "limit shape " + t,
                                       io::predicted_boundary(curve, std::log(N)),
                                       io::empirical_boundary(g, o.sim.state, c.bins)));
      }
    }
    fmt::print("k={}\n  {:>10}  {:>10}  {:>10}\n", k, "N", "max_error", "mean_error");
    for (const auto& e : errors) {
      fmt::print("  {:>10}  {:>10.4f}  {:>10.4f}\n", e.N, e.max_error, e.mean_error);
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < errors.size(); ++i) {
      decreasing = decreasing && errors[i].max_error < errors[i - 1].max_error;
    }
    if (errors.size() < 3) {
      fmt::print("  fewer than 3 values of N: no trend check\n");
    } else if (!decreasing) {
      fmt::print(stderr, "warning: k={} max error is not strictly decreasing in N\n", k);
      trend_ok = false;
    }
    if (emits(c, "csv")) {
      io::write_text(dir / fmt::format("convergence_k{}.csv", io::format_number(k)),
                     io::convergence_csv(errors));
    }
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& e : errors) {
      rows.push_back({{"N", e.N}, {"max_error", e.max_error}, {"mean_error", e.mean_error}});
    }
    report["moduli"].push_back({{"k", k}, {"convergence", rows}, {"decreasing", decreasing}});
  }
  if (!c.circle_k.empty()) {
    // Small-k limit: 4/m-normalised curves against the unit circle.
    const GraphSpec spec = [&] {
      GraphSpec s = graph_spec(c);
      if (!(s.radius > 0.0)) s.radius = 24;
      return s;
    }();
    const auto g = build_graph(spec);
    const auto lift = lift_coordinates(*g);
    std::string csv = "k,max_circle_deviation\n";
    fmt::print("unit-circle deviation after 4/m normalisation\n");
    nlohmann::json circle = nlohmann::json::array();
    for (double k : c.circle_k) {
      if (!(k > 0.0 && k < 1.0)) throw DomainError("--circle-k values need 0 < k < 1");
      const auto curve = normalise_small_k(predicted_curve(*g, lift, k, c.bins));
      double dev = 0.0;
      for (const auto& s : curve.samples) dev = std::max(dev, std::abs(s.radius_plane - 1.0));
      fmt::print("  k={}  {:.3e}\n", k, dev);
      csv += fmt::format("{},{}\n", k, dev);
      circle.push_back({{"k", k}, {"max_deviation", dev}});
    }
    report["circle"] = circle;
    if (emits(c, "csv")) io::write_text(dir / "circle.csv", csv);
  }
  if (emits(c, "json")) io::write_json(dir / "limit_shape_report.json", report);
  if (!invariants_ok) return kInvariant;
  if (!trend_ok && !c.soft_fail) return kInvariant;
  return kOk;
}

int cmd_verify(const Config& c) {
  require_positive_k(c);
  bool all = true;
  auto report = [&](bool ok, const std::string& what) {
    fmt::print("{}\n", check_line(ok, what));
    all = all && ok;
  };
  for (double k : c.k) {
    const double N = *std::max_element(c.N.begin(), c.N.end());
    GraphSpec spec = graph_spec(c);
    if (!(spec.radius > 0.0)) {
      spec.radius = initial_patch_radius(complete_integrals(k), builder_epsilon(spec), N);
    }
    const auto g = build_graph(spec);
    fmt::print("k={} graph {} radius={} vertices={}\n", k, g->builder, spec.radius, g->num_vertices());
    const auto lift = lift_coordinates(*g);
    report(true, "lift is path independent");
    const auto bl = bilipschitz_constants(*g, lift);
    report(bl.lower > 0.0, fmt::format("bi-Lipschitz delta = {:.4f}", bl.lower));
    const auto w = weigh_graph(g, k);
    const bool rho_ok = std::all_of(w.rho.begin(), w.rho.end(), [](double r) { return r > 0.0; });
    const bool mass_ok =
        std::all_of(w.mass2.begin(), w.mass2.end(), [](double m) { return m > 0.0; });
    report(rho_ok, "conductances positive");
    report(mass_ok, "masses positive");
    // <f, Delta g> = <Delta f, g> on random vectors.
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> f(w.size()), h(w.size()), lf, lh;
    for (auto& v : f) v = u(rng);
    for (auto& v : h) v = u(rng);
    laplacian_apply(w, f, lf);
    laplacian_apply(w, h, lh);
    double a = 0.0, b = 0.0, scale = 0.0;
    for (std::size_t x = 0; x < w.size(); ++x) {
      a += f[x] * lh[x];
      b += lf[x] * h[x];
      scale += std::abs(f[x] * lh[x]);
    }
    report(std::abs(a - b) < 1e-12 * scale, "Laplacian symmetric");
    double worst = 0.0;
    for (std::size_t x = 0; x < w.size(); ++x) {
      const auto tk = transition_kernel(w, static_cast<int>(x));
      double total = tk.kill;
      for (const auto& [y, pr] : tk.moves) total += pr;
      worst = std::max(worst, std::abs(total - 1.0));
    }
    report(worst < 1e-14, "transition probabilities sum to 1");
    const auto seq = stabilize_batched(w, N, g->origin);
    report(is_stable(w, seq), fmt::format("N={} stabilizes", N));
    report(mass_balance_error(w, seq) < 1e-9 * N, "mass balance");
    report(verify_odometer_identity(w, seq) < 1e-8 * N, "odometer identity");
    const auto par = stabilize_parallel(w, N, g->origin, c.workers);
    report(max_odometer_difference(seq, par) < 1e-9, "parallel equals sequential");
    const auto field = solve_potential(w, g->origin);
    report(field.residual < 1e-9, fmt::format("Green residual {:.2e}", field.residual));
    const auto bounds = compute_model_bounds(w, potential_column_sums(w));
    report(verify_threshold(w, seq, field, bounds).passed(), "threshold sandwich");
  }
  return all ? kOk : kInvariant;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Leaky Abelian sandpile on isoradial graphs with elliptic weights"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML-like key = value file; command-line flags override it");
  Config c;
  app.add_option("--graph", c.graph, "square | multigrid")
      ->check(CLI::IsMember({"square", "multigrid"}));
  app.add_option("--d", c.d, "number of grid directions (multigrid)")->check(CLI::Range(2, 64));
  app.add_option("--offsets", c.offsets, "multigrid offsets, one per grid (default: drawn from seed)");
  app.add_option("--radius", c.radius, "patch radius; 0 sizes the patch from N");
  app.add_option("--workers", c.workers, "OpenMP threads")->check(CLI::PositiveNumber);
  app.add_option("--k", c.k, "elliptic modulus (list allowed)");
  app.add_option("--N", c.N, "grain count (list allowed)");
  app.add_option("--seed", c.seed, "random seed");
  app.add_option("--out", c.out_root, "output root")->envname("ISOSAND_OUTPUT_ROOT");
  app.add_option("--name", c.name, "output subdirectory (default: the command)");
  app.add_option("--emit", c.emit, "any of csv, json, svg");
  app.add_option("--bins", c.bins, "plane direction bins")->check(CLI::Range(4, 4096));
  app.add_option("--stabilizer", c.stabilizer, "fifo | batched | parallel");
  app.add_flag("--green", c.green, "simulate: also solve for the Green function and check thresholds");
  app.add_flag("--cross-check", c.cross_check, "green: compare against the series solution");
  app.add_flag("--soft-fail", c.soft_fail, "limit-shape: a non-monotone trend only warns");
  app.add_option("--tol", c.tol, "truncation tolerance for Green patches");
  app.add_option("--max-growths", c.max_growths, "patch enlargements on region-too-small");
  app.add_option("--max-radius", c.max_radius, "refuse simulations needing a larger patch");
  app.add_option("--circle-k", c.circle_k,
                 "limit-shape: moduli for the small-k unit-circle comparison");

  std::string command;
  for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
           {"build-graph", "build a patch and write the graph JSON"},
           {"weights", "attach elliptic weights and report model constants"},
           {"green", "solve for the killed-walk potential and Green function"},
           {"simulate", "stabilize N grains and check the odometer identities"},
           {"limit-shape", "compare shapes with the predicted curve over N"},
           {"verify", "run the invariant suite"}}) {
    auto* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    sub->callback([&command, name = name] { command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (command == "build-graph") return cmd_build(c);
    if (command == "weights") return cmd_weights(c);
    if (command == "green") return cmd_green(c);
    if (command == "simulate") return cmd_simulate(c);
    if (command == "limit-shape") return cmd_limit_shape(c);
    if (command == "verify") return cmd_verify(c);
  } catch (const DomainError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsage;
  } catch (const NumericalError& e) {
    fmt::print(stderr, "numerical failure: {}\n", e.what());
    return kNumerical;
  } catch (const PoleError& e) {
    fmt::print(stderr, "numerical failure: {}\n", e.what());
    return kNumerical;
  } catch (const std::exception& e) {
    fmt::print(stderr, "invariant failure: {}\n", e.what());
    return kInvariant;
  }
  return kUsage;
}
