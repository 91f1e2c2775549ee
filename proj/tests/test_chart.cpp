#include <cmath>
#include <random>

#include "doctest.h"
#include "melnikov3d/chart.hpp"
#include "melnikov3d/errors.hpp"
#include "melnikov3d/registry.hpp"

using namespace melnikov3d;

namespace {

double sech(double x) { return 1.0 / std::cosh(x); }

/// max |∂x̄/∂p − f(x̄)| by central differences over random interior nodes.
double flow_residual(const ManifoldChart& c, double p_lo, double p_hi, int n = 200) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> up(p_lo, p_hi), ua(0.0, 1.0);
  double worst = 0.0;
  const double h = 1e-5;
  for (int k = 0; k < n; ++k) {
    const double p = up(rng), a = ua(rng);
    const Vec3 d = (c.point(p + h, a) - c.point(p - h, a)) / (2 * h);
    worst = std::max(worst, (d - c.velocity(p, a)).norm());
  }
  return worst;
}

ChartPtr generic_hill(double ring = 1e-3) {
  auto field = std::make_shared<HillClassicalField>();
  GenericChartOptions opt;
  opt.kind = ChartKind::Heteroclinic;
  opt.ring_radius = ring;
  opt.section = [](const Vec3& x) { return x.z(); };
  opt.alpha_reference = Vec3(1, 0, 0);
  opt.orientation_reference = Vec3(0, 0, 1);
  opt.far_saddle = classify_saddle(*field, Vec3(0, 0, -1));
  return generic_chart_from_saddle(field, classify_saddle(*field, Vec3(0, 0, 1)), opt);
}

}  // namespace

TEST_CASE("classical analytic chart") {
  const ChartPtr c = hill_chart_classical();
  CHECK(c->kind() == ChartKind::Heteroclinic);
  CHECK((c->point(0.0, 0.0) - Vec3(1, 0, 0)).norm() < 1e-15);
  const SphericalPoint far = cartesian_to_spherical(c->point(12.0, 0.3));
  CHECK(far.theta == doctest::Approx(kPi).epsilon(1e-7));
  for (double p : {-2.0, -0.4, 0.0, 1.3}) {
    CHECK(c->alpha_partial(p, 0.2).norm() == doctest::Approx(2 * kPi * sech(1.5 * p)).epsilon(1e-14));
    const SphericalPoint s = cartesian_to_spherical(c->point(p, 0.2));
    CHECK(s.theta == doctest::Approx(std::acos(-std::tanh(1.5 * p))).epsilon(1e-14));
    CHECK(s.phi == doctest::Approx(0.4 * kPi).epsilon(1e-14));
    CHECK(c->divergence_integral(p - 3.0, p, 0.2) == 0.0);
  }
  CHECK(c->upstream_saddle()->kind == SaddleCase::TwoDimUnstable);
  CHECK(c->downstream_saddle()->kind == SaddleCase::TwoDimStable);
  CHECK(flow_residual(*c, -3, 3) < 1e-7);
}

TEST_CASE("swirl analytic chart") {
  const ChartPtr c = hill_chart_swirl(0.1);
  for (double a : {0.0, 0.15, 0.7}) {
    const SphericalPoint s = cartesian_to_spherical(c->point(0.0, a));
    CHECK(s.theta == doctest::Approx(kPi / 2));
    CHECK(std::abs(std::remainder(s.phi - kTwoPi * a, kTwoPi)) < 1e-14);
  }
  for (double p : {-1.5, 0.0, 0.8}) {
    const Vec3 n = chart_normal(*c, p, 0.3);
    const Vec3 x = c->point(p, 0.3);
    CHECK(n.norm() == doctest::Approx(3 * kPi * std::pow(sech(1.5 * p), 2)).epsilon(1e-13));
    CHECK(n.normalized().dot(x) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(c->alpha_partial(p, 0.3).norm() == doctest::Approx(2 * kPi * sech(1.5 * p)).epsilon(1e-14));
  }
  const ChartPtr near_classical = hill_chart_swirl(1e12);
  const ChartPtr classical = hill_chart_classical();
  CHECK((near_classical->point(1.7, 0.4) - classical->point(1.7, 0.4)).norm() < 1e-11);
  CHECK(flow_residual(*c, -3, 3) < 1e-7);
  CHECK_THROWS_AS(hill_chart_swirl(0.0), DomainError);
}

TEST_CASE("chart normal of the classical sphere") {
  const ChartPtr c = hill_chart_classical();
  CHECK(chart_normal(*c, 0.0, 0.1).norm() == doctest::Approx(3 * kPi));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> up(-3, 3), ua(0, 1);
  for (int k = 0; k < 200; ++k) {
    const double p = up(rng), a = ua(rng);
    const Vec3 n = chart_normal(*c, p, a), x = c->point(p, a);
    CHECK(n.norm() == doctest::Approx(3 * kPi * std::pow(sech(1.5 * p), 2)).epsilon(1e-13));
    CHECK(n.dot(x) == doctest::Approx(n.norm()).epsilon(1e-13));
    CHECK(std::abs(n.dot(c->velocity(p, a))) <= 1e-12 * n.norm() * c->velocity(p, a).norm());
    CHECK(std::abs(n.dot(c->alpha_partial(p, a))) <= 1e-12 * n.norm() * c->alpha_partial(p, a).norm());
  }
  CHECK_THROWS_AS(chart_normal(*c, 20.0, 0.0), FoliationError);
}

TEST_CASE("analytic charts are periodic in alpha") {
  for (const ChartPtr& c : {hill_chart_classical(), hill_chart_swirl(0.2)}) {
    for (double p : {-1.0, 0.3}) {
      CHECK((c->point(p, 0.37) - c->point(p, 1.37)).norm() < 1e-14);
      CHECK((c->point(p, 0.37) - c->point(p, -0.63)).norm() < 1e-14);
    }
  }
}

TEST_CASE("shooting chart reproduces the analytic classical chart") {
  const ChartPtr g = generic_hill();
  const ChartPtr a = hill_chart_classical();
  CHECK(g->kind() == ChartKind::Heteroclinic);
  CHECK(g->domain().orientation == 1);
  double worst_x = 0.0, worst_xa = 0.0;
  for (int i = 0; i <= 40; ++i) {
    const double p = -2.0 + 0.1 * i;
    for (int j = 0; j < 29; ++j) {
      const double al = j / 29.0;
      worst_x = std::max(worst_x, (g->point(p, al) - a->point(p, al)).norm());
      worst_xa = std::max(worst_xa, (g->alpha_partial(p, al) - a->alpha_partial(p, al)).norm());
    }
  }
  CHECK(worst_x < 1e-6);
  CHECK(worst_xa < 1e-4);
  CHECK(flow_residual(*g, -4, 4) < 1e-7);
  // Periodicity through the spline.
  CHECK((g->point(0.5, 0.123) - g->point(0.5, 1.123)).norm() < 1e-12);
}

TEST_CASE("shooting chart does not depend on the ring radius beyond calibration") {
  const ChartPtr a = generic_hill(1e-3), b = generic_hill(5e-4);
  double worst = 0.0;
  for (double p : {-1.5, 0.0, 1.0})
    for (double al : {0.05, 0.5, 0.81}) worst = std::max(worst, (a->point(p, al) - b->point(p, al)).norm());
  CHECK(worst < 1e-6);
}

TEST_CASE("shooting chart on a spiralling linear saddle") {
  auto field = std::make_shared<LinearSaddleField>(1.0, 3.0, -2.0);
  const ChartPtr c = make_chart(field, "generic");
  CHECK(c->kind() == ChartKind::Unstable);
  for (double p : {-3.0, -1.0, 0.0, 0.7}) {
    for (double al : {0.0, 0.3}) {
      const Vec3 x = c->point(p, al);
      CHECK(std::abs(x.z()) < 1e-12);
      // Between ring nodes the radius carries the α-spline error (~1e-8 at 128 nodes).
      CHECK(std::hypot(x.x(), x.y()) == doctest::Approx(std::exp(p)).epsilon(1e-7));
      const Vec3 n = chart_normal(*c, p, al);
      CHECK(n.normalized().z() == doctest::Approx(1.0));
    }
  }
  CHECK(flow_residual(*c, -4, 1) < 1e-7);
  // Divergence 2l + s = 0 here is not the point; use a contracting saddle.
  auto contracting = std::make_shared<LinearSaddleField>(1.0, 0.5, -3.0);
  const ChartPtr d = make_chart(contracting, "generic");
  for (double tau : {-3.0, -1.0}) {
    CHECK(d->divergence_integral(tau, 0.5, 0.2) == doctest::Approx(-(0.5 - tau)).epsilon(1e-9));
    const double whole = d->divergence_integral(tau, 0.5, 0.2);
    const double split = d->divergence_integral(tau, -0.2, 0.2) + d->divergence_integral(-0.2, 0.5, 0.2);
    CHECK(std::abs(whole - split) < 1e-9);
  }
}

TEST_CASE("stable shooting chart around the south pole") {
  auto field = std::make_shared<HillClassicalField>();
  GenericChartOptions opt;
  opt.kind = ChartKind::Stable;
  opt.section = [](const Vec3& x) { return x.z(); };
  opt.alpha_reference = Vec3(1, 0, 0);
  opt.orientation_reference = Vec3(0, 0, 1);
  const ChartPtr s = generic_chart_from_saddle(field, classify_saddle(*field, Vec3(0, 0, -1)), opt);
  CHECK(s->kind() == ChartKind::Stable);
  const ChartPtr a = hill_chart_classical();
  for (double p : {-1.0, 0.0, 2.0}) CHECK((s->point(p, 0.2) - a->point(p, 0.2)).norm() < 1e-6);
  CHECK(flow_residual(*s, -1, 4) < 1e-7);
}

TEST_CASE("generic chart preconditions") {
  auto field = std::make_shared<HillClassicalField>();
  GenericChartOptions opt;
  opt.kind = ChartKind::Unstable;
  CHECK_THROWS_AS(generic_chart_from_saddle(field, classify_saddle(*field, Vec3(0, 0, -1)), opt), DomainError);
  opt.kind = ChartKind::Heteroclinic;
  CHECK_THROWS_AS(generic_chart_from_saddle(field, classify_saddle(*field, Vec3(0, 0, 1)), opt), ConfigError);
  opt.kind = ChartKind::Unstable;
  opt.ring_radius = 0.0;
  CHECK_THROWS_AS(generic_chart_from_saddle(field, classify_saddle(*field, Vec3(0, 0, 1)), opt), ConfigError);
}

TEST_CASE("periodic spline weights") {
  const PeriodicSplineWeights w(32);
  std::vector<double> v(32);
  for (int j = 0; j < 32; ++j) v[j] = std::sin(kTwoPi * j / 32.0);
  for (double a : {0.0, 0.013, 0.5, 0.77, 0.999}) {
    const auto s = w.at(a);
    double val = 0, der = 0, ones = 0;
    for (std::size_t k = 0; k < s.nodes.size(); ++k) {
      val += s.value[k] * v[s.nodes[k]];
      der += s.derivative[k] * v[s.nodes[k]];
      ones += s.value[k];
    }
    CHECK(ones == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(val == doctest::Approx(std::sin(kTwoPi * a)).epsilon(1e-5).scale(1.0));
    CHECK(der == doctest::Approx(kTwoPi * std::cos(kTwoPi * a)).epsilon(1e-3).scale(1.0));
  }
  const auto node = w.at(5.0 / 32.0);
  double val = 0;
  for (std::size_t k = 0; k < node.nodes.size(); ++k) val += node.value[k] * v[node.nodes[k]];
  CHECK(val == doctest::Approx(v[5]).epsilon(1e-13));
  CHECK_THROWS_AS(PeriodicSplineWeights(3), ConfigError);
}
