#include "isosand/io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include "isosand/angles.hpp"
#include "isosand/errors.hpp"

namespace isosand::io {

namespace {

void append_lift_header(std::string& out, int d) {
  for (int j = 0; j < d; ++j) out += fmt::format(",n{}", j);
}

void append_lift(std::string& out, std::span<const int> n) {
  for (int v : n) out += fmt::format(",{}", v);
}

// Viridis anchors, linearly interpolated.
std::string colour(double t) {
  static constexpr std::array<std::array<double, 3>, 5> kAnchors = {{
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
  t = std::clamp(t, 0.0, 1.0) * (kAnchors.size() - 1);
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(t), kAnchors.size() - 2);
  const double f = t - static_cast<double>(i);
  std::array<int, 3> c{};
  for (int k = 0; k < 3; ++k) {
    c[k] = static_cast<int>(std::lround(kAnchors[i][k] * (1 - f) + kAnchors[i + 1][k] * f));
  }
  return fmt::format("#{:02x}{:02x}{:02x}", c[0], c[1], c[2]);
}

struct Frame {
  double half;  // half-width of the view in plane units
  double size = 640.0;

  double sx(double x) const { return (x + half) / (2 * half) * size; }
  double sy(double y) const { return (half - y) / (2 * half) * size; }
};

double extent(const Polyline& a, const Polyline& b) {
  double r = 0.0;
  for (const auto& p : a.points) r = std::max(r, std::abs(p));
  for (const auto& p : b.points) r = std::max(r, std::abs(p));
  return r;
}

std::string polyline_element(const Polyline& line, const Frame& fr, const std::string& stroke,
                             const std::string& dash) {
  if (line.points.empty()) return {};
  std::string pts;
  for (const auto& p : line.points) pts += fmt::format("{:.2f},{:.2f} ", fr.sx(p.real()), fr.sy(p.imag()));
  return fmt::format(
      "    <{} points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"{}/>\n",
      line.closed ? "polygon" : "polyline", pts, stroke,
      dash.empty() ? "" : fmt::format(" stroke-dasharray=\"{}\"", dash));
}

std::string svg_open(const Frame& fr, const std::string& title) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" "
      "xmlns:inkscape=\"http://www.inkscape.org/namespaces/inkscape\" "
      "width=\"{0:.0f}\" height=\"{1:.0f}\" viewBox=\"0 0 {0:.0f} {1:.0f}\">\n"
      "  <title>{2}</title>\n"
      "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      fr.size, fr.size + 40, title);
}

std::string boundary_layers(const Frame& fr, const Polyline& predicted,
                            const Polyline& empirical) {
  std::string out;
  out += "  <g id=\"predicted-curve\" inkscape:groupmode=\"layer\" "
         "inkscape:label=\"predicted curve\">\n";
  out += polyline_element(predicted, fr, "#d62728", "6,4");
  out += "  </g>\n";
  out += "  <g id=\"empirical-boundary\" inkscape:groupmode=\"layer\" "
         "inkscape:label=\"empirical boundary\">\n";
  out += polyline_element(empirical, fr, "#000000", "");
  out += "  </g>\n";
  out += fmt::format(
      "  <g id=\"legend\" font-family=\"sans-serif\" font-size=\"13\">\n"
      "    <line x1=\"10\" y1=\"{0:.0f}\" x2=\"40\" y2=\"{0:.0f}\" stroke=\"#d62728\" "
      "stroke-width=\"2\" stroke-dasharray=\"6,4\"/>\n"
      "    <text x=\"45\" y=\"{1:.0f}\">predicted</text>\n"
      "    <line x1=\"140\" y1=\"{0:.0f}\" x2=\"170\" y2=\"{0:.0f}\" stroke=\"#000000\" "
      "stroke-width=\"2\"/>\n"
      "    <text x=\"175\" y=\"{1:.0f}\">empirical boundary</text>\n"
      "  </g>\n",
      fr.size + 20, fr.size + 25);
  return out;
}

}  // namespace

std::string format_number(double v) { return fmt::format("{}", v); }

GraphDiagnostics graph_diagnostics(const IsoradialGraph& g, const SurfaceLift& lift) {
  GraphDiagnostics d;
  d.bilipschitz = bilipschitz_constants(g, lift);
  double r = 0.0;
  for (const auto& z : g.diamond_position) r = std::max(r, std::abs(z));
  const std::vector<std::array<double, 2>> annuli = {{0.25 * r, 0.5 * r}, {0.5 * r, 0.75 * r}};
  d.flatness = check_asymptotic_flatness(g, lift, 16, annuli);
  return d;
}

nlohmann::json graph_json(const IsoradialGraph& g, const SurfaceLift& lift,
                          const GraphDiagnostics& diag,
                          const std::vector<const WeightedGraph*>& weights) {
  using nlohmann::json;
  json j;
  j["schema_version"] = kSchemaVersion;
  j["builder"] = g.builder;
  j["radius"] = g.radius;
  j["d"] = g.d();
  j["palette"] = g.palette;
  j["epsilon"] = g.epsilon;
  j["origin"] = g.origin;
  json vertices = json::array();
  for (std::size_t x = 0; x < g.num_vertices(); ++x) {
    const int dv = g.diamond_of_primal[x];
    const auto n = lift.of(dv);
    vertices.push_back({{"id", x},
                        {"x", g.position[x].real()},
                        {"y", g.position[x].imag()},
                        {"lift", std::vector<int>(n.begin(), n.end())},
                        {"complete", static_cast<bool>(g.complete[x])},
                        {"boundary_distance", g.boundary_distance[x]}});
  }
  j["vertices"] = std::move(vertices);
  json edges = json::array();
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& ed = g.edges[e];
    edges.push_back({{"id", e}, {"u", ed.u}, {"v", ed.v},
                     {"theta_bar", ed.theta_bar}, {"alpha_bar", ed.alpha_bar}});
  }
  j["edges"] = std::move(edges);
  j["lift"] = {{"d", lift.d}, {"diamond_vertices", g.num_diamond_vertices()},
               {"coords", lift.coords}};
  json flat = json::array();
  for (const auto& b : diag.flatness.bins) {
    flat.push_back({{"angle", b.angle}, {"direction", b.direction},
                    {"spread", b.spread}, {"annuli_hit", b.annuli_hit}});
  }
  j["diagnostics"] = {{"epsilon", g.epsilon},
                      {"d", g.d()},
                      {"bilipschitz_delta", diag.bilipschitz.lower},
                      {"bilipschitz_worst_ratio", diag.bilipschitz.worst_ratio},
                      {"flatness_max_spread", diag.flatness.max_spread},
                      {"flatness_bins", std::move(flat)}};
  json ws = json::object();
  for (const WeightedGraph* w : weights) {
    const auto b = compute_model_bounds(*w, {});
    ws[format_number(w->params.k)] = {{"k", w->params.k},
                                      {"K", w->params.K},
                                      {"E", w->params.E},
                                      {"rho", w->rho},
                                      {"mass2", w->mass2},
                                      {"diag", w->diag},
                                      {"bounds",
                                       {{"c", b.c}, {"c_prime", b.c_prime}, {"delta", b.delta},
                                        {"degenerate", b.degenerate}}}};
  }
  j["weights"] = std::move(ws);
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(1) + "\n");
}

std::string green_csv(const IsoradialGraph& g, const SurfaceLift& lift, const GreenField& f) {
  std::string out = "id,x,y";
  append_lift_header(out, lift.d);
  out += ",U,Gr\n";
  for (std::size_t x = 0; x < g.num_vertices(); ++x) {
    out += fmt::format("{},{},{}", x, g.position[x].real(), g.position[x].imag());
    append_lift(out, lift.of(g.diamond_of_primal[x]));
    out += fmt::format(",{},{}\n", f.U[x], f.Gr[x]);
  }
  return out;
}

std::string state_csv(const IsoradialGraph& g, const SurfaceLift& lift,
                      const SandpileState& st) {
  std::string out = "vertex,x,y";
  append_lift_header(out, lift.d);
  out += ",amount,odometer\n";
  for (std::size_t x = 0; x < g.num_vertices(); ++x) {
    out += fmt::format("{},{},{}", x, g.position[x].real(), g.position[x].imag());
    append_lift(out, lift.of(g.diamond_of_primal[x]));
    out += fmt::format(",{},{}\n", st.amounts[x], st.odometer[x]);
  }
  return out;
}

std::string shape_curve_csv(const ShapeCurve& curve, int d) {
  std::string out = "angle";
  append_lift_header(out, d);
  out += ",radius_Rd,radius_plane\n";
  for (const auto& s : curve.samples) {
    out += format_number(s.angle);
    for (double v : s.n_hat) out += "," + format_number(v);
    out += fmt::format(",{},{}\n", s.radius_Rd, s.radius_plane);
  }
  return out;
}

std::string convergence_csv(const std::vector<ShapeError>& errors) {
  std::string out = "N,max_error,mean_error,bins\n";
  for (const auto& e : errors) {
    out += fmt::format("{},{},{},{}\n", e.N, e.max_error, e.mean_error, e.bins.size());
  }
  return out;
}

Polyline empirical_boundary(const IsoradialGraph& g, const SandpileState& st, int bins) {
  std::vector<int> best(bins, -1);
  for (std::size_t x = 0; x < g.num_vertices(); ++x) {
    if (!(st.odometer[x] > 0.0)) continue;
    const Point z = g.position[x];
    double angle = std::arg(z);
    if (angle < 0.0) angle += 2.0 * kPi;
    const int b = std::min(bins - 1, static_cast<int>(angle / (2.0 * kPi) * bins));
    if (best[b] < 0 || std::abs(z) > std::abs(g.position[best[b]])) best[b] = static_cast<int>(x);
  }
  Polyline line;
  for (int v : best) {
    if (v >= 0) line.points.push_back(g.position[v]);
  }
  return line;
}

Polyline predicted_boundary(const ShapeCurve& curve, double scale) {
  Polyline line;
  for (const auto& s : curve.samples) {
    line.points.push_back(std::polar(s.radius_plane * scale, s.angle));
  }
  return line;
}

std::string heatmap_svg(const IsoradialGraph& g, const std::vector<double>& values,
                        const std::string& title, const Polyline& predicted,
                        const Polyline& empirical) {
  if (values.size() != g.num_vertices()) throw DomainError("heatmap: one value per vertex");
  double view = 1.2 * extent(predicted, empirical);
  if (!(view > 0.0)) {
    for (const auto& z : g.position) view = std::max(view, std::abs(z));
  }
  view = std::max(view, 3.0);
  const Frame fr{view};
  double vmax = 0.0;
  for (double v : values) vmax = std::max(vmax, v);
  const double r = std::max(1.0, 0.35 * fr.size / (2 * view));
  std::string out = svg_open(fr, title);
  out += "  <g id=\"heatmap\" inkscape:groupmode=\"layer\" inkscape:label=\"heatmap\">\n";
  for (std::size_t x = 0; x < g.num_vertices(); ++x) {
    const Point z = g.position[x];
    if (std::abs(z.real()) > view || std::abs(z.imag()) > view) continue;
    const double t = vmax > 0.0 ? values[x] / vmax : 0.0;
    out += fmt::format("    <circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.2f}\" fill=\"{}\"/>\n",
                       fr.sx(z.real()), fr.sy(z.imag()), r, colour(t));
  }
  out += "  </g>\n";
  out += boundary_layers(fr, predicted, empirical);
  out += fmt::format(
      "  <text x=\"{:.0f}\" y=\"{:.0f}\" font-family=\"sans-serif\" font-size=\"13\" "
      "text-anchor=\"end\">max {}</text>\n</svg>\n",
      fr.size - 10, fr.size + 25, format_number(vmax));
  return out;
}

std::string overlay_svg(const IsoradialGraph& g, const SandpileState& st,
                        const std::string& title, const Polyline& predicted,
                        const Polyline& empirical) {
  const double view = std::max(3.0, 1.2 * extent(predicted, empirical));
  const Frame fr{view};
  const double r = std::max(0.8, 0.25 * fr.size / (2 * view));
  std::string out = svg_open(fr, title);
  out += "  <g id=\"shape\" inkscape:groupmode=\"layer\" inkscape:label=\"shape\">\n";
  for (std::size_t x = 0; x < g.num_vertices(); ++x) {
    if (!(st.odometer[x] > 0.0)) continue;
    const Point z = g.position[x];
    out += fmt::format("    <circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.2f}\" fill=\"#9ecae1\"/>\n",
                       fr.sx(z.real()), fr.sy(z.imag()), r);
  }
  out += "  </g>\n";
  out += boundary_layers(fr, predicted, empirical);
  out += "</svg>\n";
  return out;
}

}  // namespace isosand::io
