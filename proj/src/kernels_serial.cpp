#include "isosand/weights.hpp"

namespace isosand::serial {

namespace {

bool inside(RegionMask region, int x) { return region.empty() || region[x]; }

}  // namespace

void laplacian_apply(const WeightedGraph& w, std::span<const double> f,
                     std::vector<double>& out, RegionMask region) {
  const IsoradialGraph& g = w.graph();
  const int n = static_cast<int>(w.size());
  out.assign(n, 0.0);
  for (int x = 0; x < n; ++x) {
    if (!inside(region, x)) continue;
    double acc = w.diag[x] * f[x];
    for (int slot = g.adj_offset[x]; slot < g.adj_offset[x + 1]; ++slot) {
      const int y = g.adj_vertex[slot];
      if (inside(region, y)) acc -= w.adj_rho[slot] * f[y];
    }
    out[x] = acc;
  }
}

void operator_T_apply(const WeightedGraph& w, std::span<const double> f,
                      std::vector<double>& out, RegionMask region) {
  const IsoradialGraph& g = w.graph();
  const int n = static_cast<int>(w.size());
  out.assign(n, 0.0);
  for (int x = 0; x < n; ++x) {
    if (!inside(region, x)) continue;
    double acc = -f[x];
    for (int slot = g.adj_offset[x]; slot < g.adj_offset[x + 1]; ++slot) {
      const int y = g.adj_vertex[slot];
      if (inside(region, y)) acc += w.adj_rho[slot] * f[y] / w.diag[y];
    }
    out[x] = acc;
  }
}

void operator_T_transpose_apply(const WeightedGraph& w, std::span<const double> f,
                                std::vector<double>& out, RegionMask region) {
  const IsoradialGraph& g = w.graph();
  const int n = static_cast<int>(w.size());
  out.assign(n, 0.0);
  for (int x = 0; x < n; ++x) {
    if (!inside(region, x)) continue;
    double acc = 0.0;
    for (int slot = g.adj_offset[x]; slot < g.adj_offset[x + 1]; ++slot) {
      const int y = g.adj_vertex[slot];
      if (inside(region, y)) acc += w.adj_rho[slot] * f[y];
    }
    out[x] = acc / w.diag[x] - f[x];
  }
}

}  // namespace isosand::serial
