#include "isosand/quadrature.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "isosand/errors.hpp"

namespace isosand {

namespace {

// Kronrod 15-point abscissae (positive half) and weights; every other node is
// a Gauss 7-point node.
constexpr std::array<double, 8> kXk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  double value;
  double error;
  bool roundoff_limited;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gauss_kronrod15(const std::function<double(double)>& f, double a,
                        double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(centre);
  std::array<double, 15> fv{};
  fv[7] = fc;
  double kronrod = fc * kWk[7];
  double gauss = fc * kWg[3];
  double abs_sum = std::abs(fc) * kWk[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXk[j];
    const double f1 = f(centre - dx);
    const double f2 = f(centre + dx);
    fv[j] = f1;
    fv[14 - j] = f2;
    kronrod += kWk[j] * (f1 + f2);
    abs_sum += kWk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  // QUADPACK error heuristic: scaled |K - G| with a round-off floor.
  const double mean = 0.5 * kronrod;
  double asc = kWk[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j) {
    asc += kWk[j] * (std::abs(fv[j] - mean) + std::abs(fv[14 - j] - mean));
  }
  const double h = std::abs(half);
  double err = std::abs((kronrod - gauss) * half);
  asc *= h;
  if (asc != 0.0 && err != 0.0) {
    err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
  }
  const double floor = 50.0 * std::numeric_limits<double>::epsilon() * abs_sum * h;
  bool limited = false;
  if (err <= floor) {
    err = floor;
    limited = true;
  }
  return {a, b, kronrod * half, err, limited};
}

}  // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b, double abs_tol,
                                    double rel_tol, int max_intervals) {
  if (a == b) return {0.0, 0.0, 0};
  std::priority_queue<Segment> heap;
  heap.push(gauss_kronrod15(f, a, b));
  int evaluations = 15;
  double total = heap.top().value;
  double error = heap.top().error;
  while (error > std::max(abs_tol, rel_tol * std::abs(total))) {
    if (static_cast<int>(heap.size()) >= max_intervals) {
      throw NumericalError("adaptive quadrature: interval budget exhausted");
    }
    Segment worst = heap.top();
    // The worst segment is already at round-off level: nothing left to gain.
    if (worst.roundoff_limited) break;
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Segment left = gauss_kronrod15(f, worst.a, mid);
    Segment right = gauss_kronrod15(f, mid, worst.b);
    evaluations += 30;
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    // Error estimates below round-off cannot be refined further.
    if (std::abs(worst.b - worst.a) < 1e-13 * std::abs(b - a)) break;
  }
  // Re-sum to shed accumulated cancellation in the running totals.
  double value = 0.0;
  double err = 0.0;
  while (!heap.empty()) {
    value += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  return {value, err, evaluations};
}

}  // namespace isosand
