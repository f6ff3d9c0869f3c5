#pragma once

// Dense matrix assembly straight from the weighted graph's CSR arrays, used
// as an independent oracle for the sparse kernels and solvers.

#include <Eigen/Dense>

#include "isosand/weights.hpp"

namespace oracle {

inline Eigen::MatrixXd dense_laplacian(const isosand::WeightedGraph& w) {
  const auto& g = w.graph();
  const int n = static_cast<int>(g.num_vertices());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (int x = 0; x < n; ++x) {
    double sum = 0.0;
    for (int i = g.adj_offset[x]; i < g.adj_offset[x + 1]; ++i) {
      L(x, g.adj_vertex[i]) -= w.adj_rho[i];
      sum += w.adj_rho[i];
    }
    L(x, x) = sum + w.mass2[x];
  }
  return L;
}

inline Eigen::VectorXd diag(const isosand::WeightedGraph& w) {
  return Eigen::Map<const Eigen::VectorXd>(w.diag.data(), static_cast<int>(w.diag.size()));
}

// Gr = (Delta^m)^-1, U = Gr D.
struct DensePotentials {
  Eigen::MatrixXd L, Gr, U, T;
};

inline DensePotentials dense_potentials(const isosand::WeightedGraph& w) {
  DensePotentials out;
  out.L = dense_laplacian(w);
  const Eigen::VectorXd D = diag(w);
  out.Gr = out.L.inverse();
  out.U = out.Gr * D.asDiagonal();
  out.T = -out.L * D.cwiseInverse().asDiagonal();
  return out;
}

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<int>(v.size()));
}

}  // namespace oracle
