#include "isosand/limitshape.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "isosand/angles.hpp"

namespace isosand {

namespace {

constexpr int kScanPoints = 256;

double sn_cn_over_dn(double v, const ElliptParams& p) {
  const JacobiTriple t = jacobi_sn_cn_dn(v, p);
  return t.sn * t.cn / t.dn;
}

double to_elliptic(double natural, const ElliptParams& p) {
  return 2.0 * p.K / kPi * natural;
}

// Rotation for canonical_orientation. Any rotation keeping the support
// inside (-pi/2, pi/2) is valid; among those, zero coordinates must not land
// on +-pi/2, where no flip can bring them into the open interval. Prefers no
// rotation, then the support centre, then the free point nearest the centre.
double choose_rotation(std::span<const double> angles, std::span<const double> s,
                       std::span<const double> support, double centre, bool identity_ok) {
  constexpr double kOffAxis = 1e-9;
  auto good = [&](double r) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (s[j] == 0.0 && std::abs(std::cos(angles[j] - r)) <= kOffAxis) return false;
    }
    return true;
  };
  if (identity_ok && good(0.0)) return 0.0;
  if (good(centre)) return centre;
  double half = 0.0;
  for (double a : support) half = std::max(half, std::abs(wrap_angle(a - centre)));
  const double window = 0.5 * kPi - half;
  std::vector<double> cuts = {centre - window, centre + window};
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (s[j] != 0.0) continue;
    // Rotations r with angle - r = pi/2 (mod pi), shifted next to the centre.
    double b = centre + std::remainder(angles[j] - 0.5 * kPi - centre, kPi);
    if (b > centre - window && b < centre + window) cuts.push_back(b);
  }
  std::sort(cuts.begin(), cuts.end());
  double best = centre;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    if (std::abs(mid - centre) < best_dist && good(mid)) {
      best = mid;
      best_dist = std::abs(mid - centre);
    }
  }
  return wrap_angle(best);
}

}  // namespace

OrientedDirection canonical_orientation(std::span<const double> s,
                                        std::span<const double> palette) {
  if (s.size() != palette.size()) {
    throw DomainError("direction has " + std::to_string(s.size()) +
                      " coordinates but the palette has " +
                      std::to_string(palette.size()));
  }
  double norm = 0.0;
  for (double v : s) norm += std::abs(v);
  if (!(norm > 0.0)) throw DomainError("direction must be nonzero");

  const std::size_t d = s.size();
  OrientedDirection out;
  out.s.resize(d);
  out.angles.resize(d);
  out.record.sign.assign(d, 1);
  std::vector<double> support;
  for (std::size_t j = 0; j < d; ++j) {
    if (s[j] < 0.0) out.record.sign[j] = -1;
    out.s[j] = std::abs(s[j]) / norm;
    out.angles[j] = wrap_angle(palette[j] + (s[j] < 0.0 ? kPi : 0.0));
    if (s[j] != 0.0) support.push_back(out.angles[j]);
  }
  const bool in_range = std::all_of(support.begin(), support.end(), [](double a) {
    return std::abs(a) < 0.5 * kPi;
  });
  const auto centre = half_plane_centre(support);
  if (!centre) {
    throw NotAdmissible("support angles of the direction do not fit in an open half-plane");
  }
  out.record.rotation = choose_rotation(out.angles, out.s, support, *centre, in_range);
  for (std::size_t j = 0; j < d; ++j) {
    double a = wrap_angle(out.angles[j] - out.record.rotation);
    // Zero coordinates carry no weight; flip them into range for tidiness.
    if (out.s[j] == 0.0 && std::abs(a) > 0.5 * kPi) {
      a = wrap_angle(a + kPi);
      out.record.sign[j] = -out.record.sign[j];
    }
    out.angles[j] = a;
  }
  return out;
}

double f_s_eval(double u, const OrientedDirection& dir, const ElliptParams& p) {
  double total = 0.0;
  for (std::size_t j = 0; j < dir.s.size(); ++j) {
    if (dir.s[j] == 0.0) continue;
    total += dir.s[j] * sn_cn_over_dn(0.5 * (u - to_elliptic(dir.angles[j], p)), p);
  }
  return total;
}

double u_s_zero(const OrientedDirection& dir) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < dir.s.size(); ++j) {
    num += dir.s[j] * std::sin(dir.angles[j]);
    den += dir.s[j] * std::cos(dir.angles[j]);
  }
  return std::atan(num / den);
}

double saddle_point_u(const OrientedDirection& dir, const ElliptParams& p) {
  const double ref = to_elliptic(u_s_zero(dir), p);
  const double lo = ref - 2.0 * p.K;
  const double step = 4.0 * p.K / kScanPoints;
  auto f = [&](double u) { return f_s_eval(u, dir, p); };

  double best_a = 0.0;
  double best_dist = std::numeric_limits<double>::infinity();
  double prev = f(lo);
  for (int i = 0; i < kScanPoints; ++i) {
    const double a = lo + i * step;
    const double next = f(a + step);
    if (prev < 0.0 && next >= 0.0) {
      const double dist = std::abs(a + 0.5 * step - ref);
      if (dist < best_dist) {
        best_dist = dist;
        best_a = a;
      }
    }
    prev = next;
  }
  if (!std::isfinite(best_dist)) {
    std::string samples;
    for (int i = 0; i <= 8; ++i) {
      samples += " " + std::to_string(f(lo + i * 4.0 * p.K / 8));
    }
    throw NumericalError("saddle point: f_s has no sign change on one period; samples" +
                         samples);
  }
  const double fa = f(best_a);
  const double fb = f(best_a + step);
  if (fb == 0.0) return best_a + step;
  std::uintmax_t iterations = 200;
  const auto bracket = boost::math::tools::toms748_solve(
      f, best_a, best_a + step, fa, fb, boost::math::tools::eps_tolerance<double>(52),
      iterations);
  double root = 0.5 * (bracket.first + bracket.second);
  if (std::abs(f(bracket.first)) < std::abs(f(root))) root = bracket.first;
  if (std::abs(f(bracket.second)) < std::abs(f(root))) root = bracket.second;
  if (std::abs(f(root)) >= 1e-12) {
    throw NumericalError("saddle point: residual " + std::to_string(f(root)) +
                         " above 1e-12");
  }
  return root;
}

std::vector<double> theta_vector(double u, const OrientedDirection& dir,
                                 const ElliptParams& p) {
  std::vector<double> theta(dir.s.size());
  const double half_log_kp = 0.5 * std::log(p.k_prime);
  for (std::size_t j = 0; j < theta.size(); ++j) {
    const double dn = jacobi_sn_cn_dn(0.5 * (u - to_elliptic(dir.angles[j], p)), p).dn;
    theta[j] = std::log(dn) - half_log_kp;
  }
  return theta;
}

double chi(double u, const OrientedDirection& dir, const ElliptParams& p) {
  const auto theta = theta_vector(u, dir, p);
  double total = 0.0;
  for (std::size_t j = 0; j < theta.size(); ++j) total -= theta[j] * dir.s[j];
  return total;
}

double chi2(double u, const OrientedDirection& dir, const ElliptParams& p) {
  const double h = 1e-4 * p.K;
  return (chi(u + h, dir, p) - 2.0 * chi(u, dir, p) + chi(u - h, dir, p)) / (h * h);
}

std::vector<double> DirectionProfile::theta_original() const {
  std::vector<double> out(theta_us.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = oriented.record.sign[j] * theta_us[j];
  }
  return out;
}

DirectionProfile direction_profile(std::span<const double> s,
                                   std::span<const double> palette,
                                   const ElliptParams& p) {
  DirectionProfile prof;
  prof.oriented = canonical_orientation(s, palette);
  prof.s.resize(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) {
    prof.s[j] = prof.oriented.record.sign[j] * prof.oriented.s[j];
  }
  prof.u_s = saddle_point_u(prof.oriented, p);
  prof.theta_us = theta_vector(prof.u_s, prof.oriented, p);
  prof.rate = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) prof.rate += prof.theta_us[j] * prof.oriented.s[j];
  if (!(prof.rate > 0.0)) {
    throw InvariantViolation("decay rate theta(u_s).s = " + std::to_string(prof.rate) +
                             " is not positive (k = " + std::to_string(p.k) + ")");
  }
  prof.radius = 1.0 / prof.rate;
  prof.chi2_us = chi2(prof.u_s, prof.oriented, p);
  return prof;
}

double predicted_radius(std::span<const double> s, std::span<const double> palette,
                        const ElliptParams& p) {
  return direction_profile(s, palette, p).radius;
}

std::vector<double> theta_s_zero(const OrientedDirection& dir) {
  const double u0 = u_s_zero(dir);
  std::vector<double> out(dir.s.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = std::cos(u0 - dir.angles[j]);
  return out;
}

double theta_zero_radius(const OrientedDirection& dir) {
  const auto t = theta_s_zero(dir);
  double dot = 0.0;
  for (std::size_t j = 0; j < t.size(); ++j) dot += dir.s[j] * t[j];
  return 1.0 / dot;
}

ShapeCurve predicted_plane_shape(const IsoradialGraph& g, const SurfaceLift& lift,
                                 const ElliptParams& p, int n_samples,
                                 std::array<double, 2> annulus) {
  if (n_samples < 1) throw DomainError("plane shape: need at least one sample");
  const int d = lift.d;
  std::vector<std::vector<double>> sums(n_samples, std::vector<double>(d, 0.0));
  std::vector<std::vector<int>> members(n_samples);
  for (std::size_t v = 0; v < g.num_diamond_vertices(); ++v) {
    const Point z = g.diamond_position[v];
    const double r = std::abs(z);
    if (r < annulus[0] || r > annulus[1] || r == 0.0) continue;
    double angle = std::arg(z);
    if (angle < 0.0) angle += 2.0 * kPi;
    const int bin = std::min(n_samples - 1, static_cast<int>(angle / (2.0 * kPi) * n_samples));
    const auto s = lift.reduced(static_cast<int>(v));
    for (int j = 0; j < d; ++j) sums[bin][j] += s[j];
    members[bin].push_back(static_cast<int>(v));
  }
  ShapeCurve curve;
  curve.k = p.k;
  for (int b = 0; b < n_samples; ++b) {
    const double angle = (b + 0.5) * 2.0 * kPi / n_samples;
    if (members[b].empty()) {
      curve.absent_angles.push_back(angle);
      continue;
    }
    ShapeSample sample;
    sample.angle = angle;
    sample.n_hat.resize(d);
    for (int j = 0; j < d; ++j) sample.n_hat[j] = sums[b][j] / members[b].size();
    sample.spread = 0.0;
    for (int v : members[b]) {
      const auto s = lift.reduced(v);
      double dist = 0.0;
      for (int j = 0; j < d; ++j) dist += std::abs(s[j] - sample.n_hat[j]);
      sample.spread = std::max(sample.spread, dist);
    }
    const DirectionProfile prof = direction_profile(sample.n_hat, g.palette, p);
    sample.radius_Rd = prof.radius;
    std::vector<double> scaled(prof.s);
    for (double& c : scaled) c *= prof.radius;
    sample.radius_plane = std::abs(project(std::span<const double>(scaled), g.palette));
    curve.samples.push_back(std::move(sample));
  }
  const std::size_t ns = curve.samples.size();
  for (std::size_t i = 0; ns > 1 && i < ns; ++i) {  // cyclic
    const auto& a = curve.samples[i];
    const auto& b = curve.samples[(i + 1) % ns];
    const double jump = std::abs(a.radius_plane - b.radius_plane) /
                        std::min(a.radius_plane, b.radius_plane);
    curve.max_jump = std::max(curve.max_jump, jump);
  }
  return curve;
}

ShapeCurve normalise_small_k(ShapeCurve curve) {
  const double m = curve.k * curve.k;
  for (auto& s : curve.samples) {
    s.radius_Rd *= m / 4.0;
    s.radius_plane *= m / 4.0;
  }
  curve.normalization = "4/m";
  return curve;
}

}  // namespace isosand
