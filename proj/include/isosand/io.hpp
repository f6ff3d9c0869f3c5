#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "isosand/green.hpp"
#include "isosand/limitshape.hpp"
#include "isosand/sandpile.hpp"
#include "isosand/weights.hpp"

namespace isosand::io {

inline constexpr int kSchemaVersion = 1;

/// Shortest round-trip representation; identical input gives identical text.
std::string format_number(double v);

struct GraphDiagnostics {
  BilipschitzReport bilipschitz;
  FlatnessReport flatness;
};

GraphDiagnostics graph_diagnostics(const IsoradialGraph& g, const SurfaceLift& lift);

/// Graph file: vertices, edges, angles, palette, lift, diagnostics and one
/// `weights` entry per modulus (keyed by its formatted value).
nlohmann::json graph_json(const IsoradialGraph& g, const SurfaceLift& lift,
                          const GraphDiagnostics& diag,
                          const std::vector<const WeightedGraph*>& weights);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// id,x,y,n0..n{d-1},U,Gr
std::string green_csv(const IsoradialGraph& g, const SurfaceLift& lift, const GreenField& f);

/// vertex,x,y,n0..n{d-1},amount,odometer
std::string state_csv(const IsoradialGraph& g, const SurfaceLift& lift,
                      const SandpileState& st);

/// angle,n0..n{d-1},radius_Rd,radius_plane
std::string shape_curve_csv(const ShapeCurve& curve, int d);

/// N,max_error,mean_error,bins
std::string convergence_csv(const std::vector<ShapeError>& errors);

struct Polyline {
  std::vector<Point> points;
  bool closed = true;
};

/// Outermost shape member per plane-direction bin, as a closed polygon.
Polyline empirical_boundary(const IsoradialGraph& g, const SandpileState& st, int bins);

/// Predicted plane curve scaled by `scale` (log N for a sandpile overlay).
Polyline predicted_boundary(const ShapeCurve& curve, double scale);

/// Vertex heatmap with a colour bar. The predicted curve and the empirical
/// boundary go to separate labelled layers.
std::string heatmap_svg(const IsoradialGraph& g, const std::vector<double>& values,
                        const std::string& title, const Polyline& predicted,
                        const Polyline& empirical);

/// Shape members as dots under the two boundary layers.
std::string overlay_svg(const IsoradialGraph& g, const SandpileState& st,
                        const std::string& title, const Polyline& predicted,
                        const Polyline& empirical);

}  // namespace isosand::io
