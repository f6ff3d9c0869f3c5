#include "isosand/elliptic.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "isosand/errors.hpp"
#include "isosand/quadrature.hpp"

namespace isosand {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxAgmSteps = 40;

struct AgmResult {
  double mean;
  double weighted_c2;  // sum_{n>=0} 2^{n-1} c_n^2
};

// AGM(1, b) with c_0 = sqrt(1 - b^2), accumulating the second-kind series.
AgmResult agm(double b) {
  double a = 1.0;
  double c = std::sqrt((1.0 - b) * (1.0 + b));
  double sum = 0.5 * c * c;
  double power = 0.5;
  for (int n = 0; n < kMaxAgmSteps; ++n) {
    if (std::abs(c) <= 1e-17 * a) break;
    const double a_next = 0.5 * (a + b);
    const double b_next = std::sqrt(a * b);
    c = 0.5 * (a - b);
    a = a_next;
    b = b_next;
    power *= 2.0;
    sum += power * c * c;
  }
  return {a, sum};
}

double reduce_period(double u, double period) {
  return u - period * std::nearbyint(u / period);
}

}  // namespace

ElliptParams complete_integrals(double k) {
  if (!(k >= 0.0 && k < 1.0)) {
    throw DomainError("elliptic modulus must lie in [0, 1), got " +
                      std::to_string(k));
  }
  ElliptParams p;
  p.k = k;
  p.m = k * k;
  p.k_prime = std::sqrt((1.0 - k) * (1.0 + k));
  if (k == 0.0) {
    p.K = p.E = 0.5 * kPi;
    p.K_prime = std::numeric_limits<double>::infinity();
    p.E_prime = 1.0;
    return p;
  }
  const AgmResult main = agm(p.k_prime);
  p.K = 0.5 * kPi / main.mean;
  p.E = p.K * (1.0 - main.weighted_c2);
  const AgmResult comp = agm(k);
  p.K_prime = 0.5 * kPi / comp.mean;
  p.E_prime = p.K_prime * (1.0 - comp.weighted_c2);
  return p;
}

JacobiTriple jacobi_sn_cn_dn(double u, const ElliptParams& p) {
  if (p.k == 0.0) return {std::sin(u), std::cos(u), 1.0};
  // sn, cn have period 4K; reducing keeps the scaled amplitude small.
  u = reduce_period(u, 4.0 * p.K);

  std::array<double, kMaxAgmSteps + 1> a{};
  std::array<double, kMaxAgmSteps + 1> c{};
  a[0] = 1.0;
  double b = p.k_prime;
  c[0] = p.k;
  int n = 0;
  while (std::abs(c[n]) > 1e-16 * a[n] && n < kMaxAgmSteps) {
    a[n + 1] = 0.5 * (a[n] + b);
    c[n + 1] = 0.5 * (a[n] - b);
    b = std::sqrt(a[n] * b);
    ++n;
  }
  double phi = std::ldexp(a[n] * u, n);
  for (int j = n; j > 0; --j) {
    phi = 0.5 * (phi + std::asin(c[j] / a[j] * std::sin(phi)));
  }
  const double sn = std::sin(phi);
  const double cn = std::cos(phi);
  // The Landen form cn / cos(phi_1 - phi_0) degrades as cn -> 0; the factored
  // square root stays accurate because k sn <= k < 1.
  const double dn = std::sqrt((1.0 - p.k * sn) * (1.0 + p.k * sn));
  return {sn, cn, dn};
}

double jacobi_ratio(std::string_view code, double u, const ElliptParams& p) {
  auto valid = [](char ch) {
    return ch == 's' || ch == 'c' || ch == 'd' || ch == 'n';
  };
  if (code.size() != 2 || !valid(code[0]) || !valid(code[1]) ||
      code[0] == code[1]) {
    throw DomainError("invalid Jacobi ratio code '" + std::string(code) + "'");
  }
  // Real poles of pq are the real zeros of q: sn at 2jK, cn at (2j+1)K.
  const char denom = code[1];
  if (denom == 's' || denom == 'c') {
    const double shift = denom == 's' ? 0.0 : p.K;
    const double dist =
        std::abs(reduce_period(u - shift, 2.0 * p.K));
    if (dist < 1e-9 * p.K) {
      throw PoleError("Jacobi ratio '" + std::string(code) +
                      "' evaluated at a real pole, u = " + std::to_string(u));
    }
  }
  const JacobiTriple t = jacobi_sn_cn_dn(u, p);
  auto pick = [&t](char ch) {
    switch (ch) {
      case 's': return t.sn;
      case 'c': return t.cn;
      case 'd': return t.dn;
      default: return 1.0;
    }
  };
  return pick(code[0]) / pick(code[1]);
}

double integral_Dc(double u, const ElliptParams& p) {
  if (u == 0.0) return 0.0;
  if (std::abs(u) > p.K * (1.0 - 1e-9)) {
    throw PoleError("Dc: integration interval reaches the pole of dc at K");
  }
  if (p.k == 0.0) return std::tan(u);
  auto dc2 = [&p](double v) {
    const JacobiTriple t = jacobi_sn_cn_dn(v, p);
    const double dc = t.dn / t.cn;
    return dc * dc;
  };
  // Near K the integrand inherits the relative error eps K / (K - |u|) of
  // cn(u); asking for more than that only burns the interval budget.
  const double conditioning =
      std::numeric_limits<double>::epsilon() * p.K / (p.K - std::abs(u));
  return integrate_adaptive(dc2, 0.0, u, 1e-13, 1e-14 + 10.0 * conditioning)
      .value;
}

double func_A(double u, const ElliptParams& p) {
  if (p.k == 0.0) return integral_Dc(u, p);
  return (integral_Dc(u, p) + (p.E - p.K) / p.K * u) / p.k_prime;
}

double elliptic_angle(double theta_bar, const ElliptParams& p) {
  return 2.0 * p.K / kPi * theta_bar;
}

}  // namespace isosand
