#include <cmath>
#include <random>

#include "doctest.h"
#include "melnikov3d/errors.hpp"
#include "melnikov3d/geometry.hpp"

using namespace melnikov3d;

namespace {

Vec3 random_vec(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return {u(rng), u(rng), u(rng)};
}

Mat3 random_mat(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = u(rng);
  return m;
}

}  // namespace

TEST_CASE("wedge examples") {
  CHECK(wedge(Vec3(1, 0, 0), Vec3(0, 1, 0)) == Vec3(0, 0, 1));
  const Vec3 b(0.3, -1.2, 7.0);
  CHECK(wedge(b, b) == Vec3::Zero());
  CHECK(wedge(Vec3(1, 2, 3), Vec3(4, 5, 6)) == Vec3(-3, 6, -3));
}

TEST_CASE("scalar triple examples") {
  CHECK(scalar_triple(Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)) == 1.0);
  const Vec3 b(1, 2, 3), c(-4, 0.5, 2);
  CHECK(scalar_triple(b, b, c) == 0.0);
  CHECK(scalar_triple(b, c, c) == 0.0);
  CHECK(std::abs(scalar_triple(b, c, b)) < 1e-14);
  CHECK(scalar_triple(Vec3(1, 2, 3), Vec3(4, 5, 6), Vec3(7, 8, 10)) == doctest::Approx(-3.0).epsilon(1e-15));
}

TEST_CASE("triple identity residual for identity and zero matrices") {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 100; ++k) {
    const Vec3 b = random_vec(rng), c = random_vec(rng), d = random_vec(rng);
    const double scale = std::abs(scalar_triple(b, c, d)) + 1.0;
    CHECK(std::abs(triple_identity_residual(Mat3::Identity(), b, c, d)) < 1e-15 * scale * 8);
    CHECK(triple_identity_residual(Mat3::Zero(), b, c, d) == 0.0);
  }
}

TEST_CASE("triple identity holds for 10^4 random inputs") {
  std::mt19937_64 rng(20240611);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const Mat3 A = random_mat(rng);
    const Vec3 b = random_vec(rng), c = random_vec(rng), d = random_vec(rng);
    const double scale = std::abs(A.trace() * scalar_triple(b, c, d)) + 1.0;
    worst = std::max(worst, std::abs(triple_identity_residual(A, b, c, d)) / scale);
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("wedge algebraic properties") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 1000; ++k) {
    const Vec3 b = random_vec(rng), c = random_vec(rng);
    const Vec3 s = wedge(b, c) + wedge(c, b);
    CHECK(s.cwiseAbs().maxCoeff() <= std::numeric_limits<double>::epsilon() * 4);
    const double lhs = wedge(b, c).squaredNorm() + std::pow(b.dot(c), 2);
    const double rhs = b.squaredNorm() * c.squaredNorm();
    CHECK(std::abs(lhs - rhs) <= 1e-12 * rhs);
  }
}

TEST_CASE("spherical point normalization") {
  const SphericalPoint p(2.0, 4.0, -0.5);
  CHECK(p.theta == doctest::Approx(kPi));
  CHECK(p.phi == doctest::Approx(kTwoPi - 0.5));
  CHECK(SphericalPoint(1.0, 0.3, 7.0).phi == doctest::Approx(7.0 - kTwoPi));
  CHECK_THROWS_AS(make_vec3(1.0, NAN, 0.0), DomainError);
}

TEST_CASE("spherical conversions") {
  const Vec3 x = spherical_to_cartesian(SphericalPoint(1.0, kPi / 2, 0.0));
  CHECK((x - Vec3(1, 0, 0)).norm() < 1e-15);

  const Vec3 th = spherical_vector_to_cartesian(SphericalPoint(1.0, kPi / 2, 0.0), Vec3(0, 1, 0));
  CHECK((th - Vec3(0, 0, -1)).norm() < 1e-15);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int k = 0; k < 1000; ++k) {
    const Vec3 y(u(rng), u(rng), u(rng));
    const SphericalPoint sp = cartesian_to_spherical(y);
    CHECK((spherical_to_cartesian(sp) - y).norm() <= 1e-14 * std::max(1.0, y.norm()));

    const Vec3 v(u(rng), u(rng), u(rng));
    const Vec3 vc = spherical_vector_to_cartesian(sp, v);
    CHECK(std::abs(vc.norm() - v.norm()) <= 1e-13 * v.norm());
    CHECK((cartesian_vector_to_spherical(sp, vc) - v).norm() <= 1e-13 * v.norm());
  }
}

TEST_CASE("spherical frame is orthonormal and right-handed") {
  const Mat3 F = spherical_frame(0.7, 2.1);
  CHECK((F.transpose() * F - Mat3::Identity()).norm() < 1e-15);
  CHECK(F.determinant() == doctest::Approx(1.0));
}

TEST_CASE("vector conversion on the axis is a pole singularity") {
  CHECK_THROWS_AS(spherical_vector_to_cartesian(SphericalPoint(1.0, 0.0, 0.0), Vec3(1, 0, 0)), PoleSingularity);
  CHECK_THROWS_AS(spherical_vector_to_cartesian(SphericalPoint(1.0, kPi, 0.0), Vec3(1, 0, 0)), PoleSingularity);
  CHECK_THROWS_AS(cartesian_vector_to_spherical(SphericalPoint(2.0, 0.0, 1.0), Vec3(1, 0, 0)), PoleSingularity);
}
