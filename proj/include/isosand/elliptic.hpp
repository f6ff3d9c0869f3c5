#pragma once

#include <string_view>

namespace isosand {

/// Elliptic modulus bundle shared by every elliptic evaluation.
///
/// `K_prime` is +infinity when k = 0 (K(1) diverges); `E_prime` is then 1.
struct ElliptParams {
  double k = 0.0;
  double m = 0.0;  ///< parameter k^2
  double k_prime = 1.0;
  double K = 0.0;
  double K_prime = 0.0;
  double E = 0.0;
  double E_prime = 0.0;
};

/// Complete integrals K, E and their complements by arithmetic-geometric mean.
/// Throws DomainError unless 0 <= k < 1.
ElliptParams complete_integrals(double k);

struct JacobiTriple {
  double sn;
  double cn;
  double dn;
};

/// sn, cn, dn at real argument u (descending Landen / AGM recursion).
JacobiTriple jacobi_sn_cn_dn(double u, const ElliptParams& p);

/// Glaisher ratio pq = p/q for two distinct letters of {s, c, d, n}, with
/// n standing for the constant 1. Throws PoleError within 1e-9 K of a real
/// pole of the ratio and DomainError for a malformed code.
double jacobi_ratio(std::string_view code, double u, const ElliptParams& p);

/// Dc(u|k) = integral_0^u dc^2(v|k) dv, |u| < K.
double integral_Dc(double u, const ElliptParams& p);

/// A(u|k) = (Dc(u|k) + (E - K) u / K) / k'.
double func_A(double u, const ElliptParams& p);

/// Natural angle (radians) to elliptic units: (2K/pi) * theta_bar.
double elliptic_angle(double theta_bar, const ElliptParams& p);

}  // namespace isosand
