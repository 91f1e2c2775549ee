#include "melnikov3d/geometry.hpp"

#include <algorithm>

namespace melnikov3d {

SphericalPoint::SphericalPoint(double r_, double theta_, double phi_) {
  if (!std::isfinite(r_) || !std::isfinite(theta_) || !std::isfinite(phi_))
    throw DomainError("SphericalPoint component is not finite");
  if (r_ < 0.0) throw DomainError("SphericalPoint radius must be non-negative");
  r = r_;
  theta = std::clamp(theta_, 0.0, kPi);
  phi = std::fmod(phi_, kTwoPi);
  if (phi < 0.0) phi += kTwoPi;
  if (phi >= kTwoPi) phi = 0.0;
}

Mat3 spherical_frame(double theta, double phi) {
  const double st = std::sin(theta), ct = std::cos(theta);
  const double sp = std::sin(phi), cp = std::cos(phi);
  Mat3 frame;
  frame.col(0) << st * cp, st * sp, ct;
  frame.col(1) << ct * cp, ct * sp, -st;
  frame.col(2) << -sp, cp, 0.0;
  return frame;
}

Vec3 spherical_to_cartesian(const SphericalPoint& p) {
  const double st = std::sin(p.theta);
  return {p.r * st * std::cos(p.phi), p.r * st * std::sin(p.phi), p.r * std::cos(p.theta)};
}

SphericalPoint cartesian_to_spherical(const Vec3& x) {
  if (!all_finite(x)) throw DomainError("cartesian point is not finite");
  const double rho = std::hypot(x.x(), x.y());
  const double r = std::hypot(rho, x.z());
  // atan2 keeps θ accurate near the poles where acos(z/r) loses digits.
  const double theta = r > 0.0 ? std::atan2(rho, x.z()) : 0.0;
  const double phi = rho > 0.0 ? std::atan2(x.y(), x.x()) : 0.0;
  return SphericalPoint(r, theta, phi);
}

Vec3 spherical_vector_to_cartesian(const SphericalPoint& p, const Vec3& v_sph) {
  if (p.on_axis()) throw PoleSingularity("spherical basis undefined on the z-axis");
  return spherical_frame(p.theta, p.phi) * v_sph;
}

Vec3 cartesian_vector_to_spherical(const SphericalPoint& p, const Vec3& v_cart) {
  if (p.on_axis()) throw PoleSingularity("spherical basis undefined on the z-axis");
  return spherical_frame(p.theta, p.phi).transpose() * v_cart;
}

}  // namespace melnikov3d
