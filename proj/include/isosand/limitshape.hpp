#pragma once

#include <span>
#include <string>
#include <vector>

#include "isosand/elliptic.hpp"
#include "isosand/errors.hpp"
#include "isosand/isograph.hpp"

namespace isosand {

/// The support angles of a direction do not fit in an open half-plane.
class NotAdmissible : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Sign flips and rotation taking a direction to canonical form.
struct Orientation {
  std::vector<int> sign;  ///< +1 kept, -1 flipped (angle shifted by pi)
  double rotation = 0.0;  ///< subtracted from every angle after flipping
};

struct OrientedDirection {
  std::vector<double> s;       ///< l1-normalised, nonnegative
  std::vector<double> angles;  ///< natural radians, support in (-pi/2, pi/2)
  Orientation record;
};

/// Flips negative coordinates and rotates so the support angles are centred
/// on 0. Throws NotAdmissible when no open half-plane contains them.
OrientedDirection canonical_orientation(std::span<const double> s,
                                        std::span<const double> palette);

/// f_s(u, m) = sum_j s_j (sn cn / dn)((u - alpha_j) / 2 | m), alpha_j in
/// elliptic units.
double f_s_eval(double u, const OrientedDirection& dir, const ElliptParams& p);

/// Closed-form root at m = 0: arctan(sum s sin a / sum s cos a).
double u_s_zero(const OrientedDirection& dir);

/// Root of f_s continued from the k = 0 closed form: the - to + sign change
/// nearest (2K/pi) u_s(0) on a 256-point scan of one period, then refined.
/// Throws NumericalError if no sign change is found.
double saddle_point_u(const OrientedDirection& dir, const ElliptParams& p);

/// theta_j(u) = -log(sqrt(k') nd((u - alpha_j) / 2 | k)) in the oriented frame.
std::vector<double> theta_vector(double u, const OrientedDirection& dir,
                                 const ElliptParams& p);

/// chi(u) = -theta(u) . s.
double chi(double u, const OrientedDirection& dir, const ElliptParams& p);

/// chi'' by central differences with step 1e-4 K.
double chi2(double u, const OrientedDirection& dir, const ElliptParams& p);

struct DirectionProfile {
  std::vector<double> s;  ///< original frame, l1-normalised
  OrientedDirection oriented;
  double u_s = 0.0;
  std::vector<double> theta_us;  ///< oriented frame
  double rate = 0.0;             ///< theta(u_s) . s > 0
  double radius = 0.0;           ///< 1 / rate
  double chi2_us = 0.0;

  /// theta(u_s) expressed in the original frame: sign_j * theta'_j.
  std::vector<double> theta_original() const;
};

/// Full profile for direction s (any nonzero vector; normalised here).
/// Throws InvariantViolation when the rate is not positive.
DirectionProfile direction_profile(std::span<const double> s,
                                   std::span<const double> palette,
                                   const ElliptParams& p);

double predicted_radius(std::span<const double> s, std::span<const double> palette,
                        const ElliptParams& p);

/// 1 / sum_j s_j cos(u_s(0) - alpha_j) in the oriented frame.
double theta_zero_radius(const OrientedDirection& dir);

/// theta_s(0) = (cos(u_s(0) - alpha_j))_j, the m -> 0 limit of 4 theta / m.
std::vector<double> theta_s_zero(const OrientedDirection& dir);

struct ShapeSample {
  double angle;                ///< plane direction, radians in [0, 2 pi)
  std::vector<double> n_hat;   ///< estimated n(v), l1-normalised
  double radius_Rd;            ///< 1 / (theta(u_s) . s)
  double radius_plane;         ///< |pi(radius_Rd n_hat)|
  double spread;               ///< l1 spread of the estimate within the bin
};

struct ShapeCurve {
  double k = 0.0;
  std::string normalization = "log N";  ///< or "4/m"
  std::vector<ShapeSample> samples;
  std::vector<double> absent_angles;  ///< bins with no vertex in the annulus
  double max_jump = 0.0;  ///< largest relative radius jump between neighbours
};

/// Predicted limit curve sampled at n_samples plane directions, with n(v)
/// estimated from diamond vertices whose plane radius lies in `annulus`.
ShapeCurve predicted_plane_shape(const IsoradialGraph& g, const SurfaceLift& lift,
                                 const ElliptParams& p, int n_samples,
                                 std::array<double, 2> annulus);

/// Rescales plane radii by m / 4 (the k -> 0 normalisation).
ShapeCurve normalise_small_k(ShapeCurve curve);

}  // namespace isosand
