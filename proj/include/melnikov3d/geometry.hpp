#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "melnikov3d/errors.hpp"

namespace melnikov3d {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;

using Vec3 = Vector3<double>;
using Mat3 = Matrix3<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.array().isFinite().all();
}

/// Builds a Vec3 and rejects NaN/Inf components.
inline Vec3 make_vec3(double x, double y, double z) {
  Vec3 v(x, y, z);
  if (!all_finite(v)) throw DomainError("Vec3 component is not finite");
  return v;
}

/// Right-handed cross product b ∧ c.
template <typename DerivedB, typename DerivedC>
auto wedge(const Eigen::MatrixBase<DerivedB>& b, const Eigen::MatrixBase<DerivedC>& c) {
  return b.cross(c);
}

/// (b ∧ c) · d, the signed volume of the parallelepiped spanned by b, c, d.
template <typename DerivedB, typename DerivedC, typename DerivedD>
typename DerivedB::Scalar scalar_triple(const Eigen::MatrixBase<DerivedB>& b,
                                        const Eigen::MatrixBase<DerivedC>& c,
                                        const Eigen::MatrixBase<DerivedD>& d) {
  return b.cross(c).dot(d);
}

/// [(Ab)∧c]·d + [b∧(Ac)]·d + [b∧c]·(Ad) − Tr(A)[(b∧c)·d].
///
/// Identically zero for every 3x3 A; the Melnikov derivation uses it to
/// turn the variational equation of the normal into a divergence weight.
template <typename DerivedA, typename DerivedB, typename DerivedC, typename DerivedD>
typename DerivedA::Scalar triple_identity_residual(const Eigen::MatrixBase<DerivedA>& A,
                                                   const Eigen::MatrixBase<DerivedB>& b,
                                                   const Eigen::MatrixBase<DerivedC>& c,
                                                   const Eigen::MatrixBase<DerivedD>& d) {
  using Scalar = typename DerivedA::Scalar;
  const Vector3<Scalar> Ab = A * b;
  const Vector3<Scalar> Ac = A * c;
  const Vector3<Scalar> Ad = A * d;
  const Scalar lhs = scalar_triple(Ab, c, d) + scalar_triple(b, Ac, d) + b.cross(c).dot(Ad);
  return lhs - A.trace() * scalar_triple(b, c, d);
}

/// Point in (r, θ, φ): θ from the +z pole, φ counterclockwise from +x.
struct SphericalPoint {
  double r = 0.0;
  double theta = 0.0;
  double phi = 0.0;

  SphericalPoint() = default;
  /// Clamps θ into [0, π] and reduces φ into [0, 2π).
  SphericalPoint(double r_, double theta_, double phi_);

  bool on_axis() const { return theta == 0.0 || theta == kPi; }
};

/// Local orthonormal frame (r̂, θ̂, φ̂) at angles (θ, φ), as matrix columns.
/// Defined everywhere, including the poles (where φ̂ depends on the φ passed).
Mat3 spherical_frame(double theta, double phi);

Vec3 spherical_to_cartesian(const SphericalPoint& p);
SphericalPoint cartesian_to_spherical(const Vec3& x);

/// Rotates (v_r, v_θ, v_φ) into Cartesian components. Throws PoleSingularity on
/// the z-axis, where φ̂ is not determined by the point.
Vec3 spherical_vector_to_cartesian(const SphericalPoint& p, const Vec3& v_sph);
Vec3 cartesian_vector_to_spherical(const SphericalPoint& p, const Vec3& v_cart);

}  // namespace melnikov3d
