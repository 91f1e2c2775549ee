#include <cmath>

#include "doctest.h"
#include "melnikov3d/errors.hpp"
#include "melnikov3d/integrator.hpp"

using namespace melnikov3d;

TEST_CASE("a fixed point stays put") {
  const HillClassicalField f;
  const Trajectory tr = integrate(f, nullptr, 0.0, Vec3(0, 0, 1), 0.0, 5.0, 1e-12);
  CHECK((tr.back().x - Vec3(0, 0, 1)).norm() < 1e-12);
  CHECK(tr.divergence_integrals().front() == 0.0);
}

TEST_CASE("equatorial start follows the heteroclinic latitude") {
  const HillClassicalField f;
  const Vec3 x0 = spherical_to_cartesian(SphericalPoint(1.0, kPi / 2, 0.3));
  const Trajectory fwd = integrate(f, nullptr, 0.0, x0, 0.0, 3.0, 1e-12);
  const Trajectory bwd = integrate(f, nullptr, 0.0, x0, 0.0, -3.0, 1e-12);
  CHECK(bwd.direction() == -1.0);
  double worst = 0.0;
  for (int k = -30; k <= 30; ++k) {
    const double p = 0.1 * k;
    const Vec3 x = p >= 0 ? fwd.state_at(p) : bwd.state_at(p);
    const SphericalPoint s = cartesian_to_spherical(x);
    worst = std::max(worst, std::abs(s.theta - std::acos(-std::tanh(1.5 * p))));
    // Off-sphere errors are amplified near the saddles (~2.5e-10 at |p| = 3).
    CHECK(s.r == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(s.phi == doctest::Approx(0.3).epsilon(1e-10));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("forward then backward returns to the start") {
  const HillSwirlField f(0.3);
  const Vec3 x0(0.3, -0.2, 0.5);
  const double tol = 1e-11;
  const Trajectory fwd = integrate(f, nullptr, 0.0, x0, 0.0, 4.0, tol);
  const Trajectory bwd = integrate(f, nullptr, 0.0, fwd.back().x, 4.0, 0.0, tol);
  CHECK((bwd.back().x - x0).norm() < 10 * tol);
}

TEST_CASE("sample times are monotone and the dense output is bounded to the run") {
  const HillClassicalField f;
  const Trajectory tr = integrate(f, nullptr, 0.0, Vec3(0.2, 0.1, 0.4), 1.0, -2.0, 1e-10);
  for (std::size_t i = 1; i < tr.times().size(); ++i) CHECK(tr.times()[i] < tr.times()[i - 1]);
  CHECK(tr.contains(-1.0));
  CHECK(!tr.contains(1.5));
  CHECK_THROWS_AS(tr.at(1.5), DomainError);
  CHECK(tr.stats().accepted > 0);
}

TEST_CASE("divergence accumulator on a linear saddle") {
  const LinearSaddleField f(0.5, 1.0, -2.0);
  const Trajectory tr = integrate(f, nullptr, 0.0, Vec3(0.1, 0.0, 0.2), 0.0, 3.0, 1e-12);
  for (double t : {0.0, 0.7, 1.9, 3.0}) CHECK(std::abs(tr.at(t).divergence_integral + t) < 1e-10);
  // Exact flow: in-plane rotation with growth, normal decay.
  const Vec3 x = tr.state_at(2.0);
  const double g = 0.1 * std::exp(1.0);
  CHECK(x.x() == doctest::Approx(g * std::cos(2.0)).epsilon(1e-9));
  CHECK(x.y() == doctest::Approx(g * std::sin(2.0)).epsilon(1e-9));
  CHECK(x.z() == doctest::Approx(0.2 * std::exp(-4.0)).epsilon(1e-9));
}

TEST_CASE("perturbed linear saddle matches the forced solution") {
  const LinearSaddleField f(1.0, 0.0, -1.0);
  const UniformZPerturbation g(2.0);
  const double eps = 0.3;
  const Trajectory tr = integrate(f, &g, eps, Vec3(0.0, 0.0, 0.0), 0.0, 4.0, 1e-12);
  // z' = -z + eps cos(2t), z(0) = 0.
  const auto z = [&](double t) { return eps * (std::cos(2 * t) + 2 * std::sin(2 * t) - std::exp(-t)) / 5.0; };
  for (double t : {0.5, 1.0, 4.0}) CHECK(tr.state_at(t).z() == doctest::Approx(z(t)).epsilon(1e-9).scale(1e-10));
  // Without a perturbation object eps is ignored.
  CHECK(integrate(f, nullptr, eps, Vec3::Zero(), 0.0, 1.0, 1e-12).back().x.norm() == 0.0);
}

TEST_CASE("RK4 cross-check") {
  const HillSwirlField f(0.5);
  const RadialGrPerturbation g;
  const Vec3 x0(0.4, 0.3, -0.2);
  const Vec3 a = integrate(f, &g, 0.05, x0, 0.0, 2.0, 1e-12).back().x;
  const Vec3 b = integrate_rk4(f, &g, 0.05, x0, 0.0, 2.0, 4000);
  CHECK((a - b).norm() < 1e-10);
}

TEST_CASE("blow-up and stop predicate") {
  const LinearSaddleField f(2.0, 0.0, -1.0);
  IntegratorOptions opt;
  opt.blowup_radius = 100.0;
  const DormandPrince45 dp(f, nullptr, 0.0, opt);
  CHECK_THROWS_AS(dp.run(Vec3(1, 0, 0), 0.0, 10.0), IntegrationError);

  const Trajectory tr = dp.run(Vec3(1, 0, 0), 0.0, 10.0, [](double, const AugmentedState& s) { return s.x.x() > 5.0; });
  CHECK(tr.t_end() < 10.0);
  CHECK(tr.back().x.x() > 5.0);
  CHECK(tr.back().arc_length == doctest::Approx(tr.back().x.x() - 1.0).epsilon(1e-8));
}
