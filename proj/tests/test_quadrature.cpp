#include <cmath>

#include "doctest.h"
#include "melnikov3d/errors.hpp"
#include "melnikov3d/geometry.hpp"
#include "melnikov3d/quadrature.hpp"

using namespace melnikov3d;

TEST_CASE("adaptive Simpson on known integrals") {
  const QuadratureResult a = adaptive_simpson([](double x) { return std::sin(x); }, 0.0, kPi, 1e-14, 1e-12);
  CHECK(a.value == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(a.error < 1e-10);
  CHECK(a.evaluations > 0);

  const QuadratureResult b = adaptive_simpson([](double x) { return std::exp(-x * x); }, -8.0, 8.0, 1e-14, 1e-12);
  CHECK(b.value == doctest::Approx(std::sqrt(kPi)).epsilon(1e-12));

  const QuadratureResult c = adaptive_simpson([](double x) { return x * x * x; }, 1.0, 0.0, 1e-14, 1e-12);
  CHECK(c.value == doctest::Approx(-0.25).epsilon(1e-14));
  CHECK(adaptive_simpson([](double) { return 1.0; }, 2.0, 2.0, 1e-12, 1e-10).value == 0.0);
}

TEST_CASE("Gauss-Legendre on known integrals") {
  const QuadratureResult a = gauss_legendre([](double x) { return std::cos(40 * x); }, 0.0, 1.0, 1e-15, 1e-13);
  CHECK(a.value == doctest::Approx(std::sin(40.0) / 40.0).epsilon(1e-12));
  const QuadratureResult b = gauss_legendre([](double x) { return 1.0 / (1.0 + x * x); }, 0.0, 1.0, 1e-15, 1e-13);
  CHECK(b.value == doctest::Approx(kPi / 4).epsilon(1e-14));
}

TEST_CASE("rules agree with each other and with fixed Simpson") {
  const Integrand f = [](double x) { return std::pow(1.0 / std::cosh(1.5 * x), 3) * std::cos(4 * x); };
  const double s = integrate(QuadratureRule::AdaptiveSimpson, f, 0.0, 30.0, 1e-14, 1e-12, 200000).value;
  const double g = integrate(QuadratureRule::GaussLegendre, f, 0.0, 30.0, 1e-14, 1e-12, 200000).value;
  const double fixed = composite_simpson(f, 0.0, 30.0, 60000);
  CHECK(std::abs(s - g) < 1e-12);
  CHECK(std::abs(s - fixed) < 1e-11);
}

TEST_CASE("composite Simpson converges at fourth order") {
  const Integrand f = [](double x) { return std::exp(x); };
  const double exact = std::exp(1.0) - 1.0;
  const double e1 = std::abs(composite_simpson(f, 0.0, 1.0, 16) - exact);
  const double e2 = std::abs(composite_simpson(f, 0.0, 1.0, 32) - exact);
  CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.02));
  CHECK_THROWS_AS(composite_simpson(f, 0.0, 1.0, 7), ConfigError);
}

TEST_CASE("quadrature failures and rule names") {
  CHECK_THROWS_AS(adaptive_simpson([](double x) { return 1.0 / std::sqrt(std::abs(x - 0.3)); }, 0.0, 1.0, 1e-15, 1e-15, 50),
                  QuadratureError);
  CHECK_THROWS_AS(adaptive_simpson([](double x) { return x; }, 0.0, 1.0, 0.0, -1.0), ConfigError);
  CHECK(quadrature_rule_from_string("simpson") == QuadratureRule::AdaptiveSimpson);
  CHECK(quadrature_rule_from_string("gauss-legendre") == QuadratureRule::GaussLegendre);
  CHECK(std::string(to_string(QuadratureRule::GaussLegendre)) == "gauss-legendre");
  CHECK_THROWS_AS(quadrature_rule_from_string("trapezoid"), ConfigError);
}
