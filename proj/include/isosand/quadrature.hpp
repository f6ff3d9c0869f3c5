#pragma once

#include <functional>

namespace isosand {

struct QuadratureResult {
  double value;
  double error_estimate;
  int evaluations;
};

/// Adaptive Gauss-Kronrod (G7/K15) integration on [a, b] with bisection of
/// the interval of largest error until `abs_tol` or `rel_tol` is met.
/// Throws NumericalError when `max_intervals` is exhausted.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b, double abs_tol,
                                    double rel_tol, int max_intervals = 2000);

}  // namespace isosand
