#include <cmath>
#include <functional>

#include "doctest.h"
#include "melnikov3d/errors.hpp"
#include "melnikov3d/heteroclinic.hpp"
#include "melnikov3d/hill_closed_form.hpp"

using namespace melnikov3d;

namespace {

using Fn = std::function<double(double p, double alpha)>;

MelnikovField synthetic(const Fn& M, double p_min, double p_max, std::size_t n_p, std::size_t n_alpha, double t = 0.0) {
  MelnikovField f;
  f.t = t;
  for (std::size_t i = 0; i < n_p; ++i) f.p.push_back(p_min + (p_max - p_min) * i / (n_p - 1.0));
  for (std::size_t j = 0; j < n_alpha; ++j) f.alpha.push_back(j / static_cast<double>(n_alpha));
  f.values.resize(n_p, n_alpha);
  for (std::size_t i = 0; i < n_p; ++i)
    for (std::size_t j = 0; j < n_alpha; ++j) f.values(i, j) = M(f.p[i], f.alpha[j]);
  update_gradients(f);
  return f;
}

double auto_threshold(const MelnikovField& f) {
  return 1e-6 * (f.dMdp.cwiseAbs() + f.dMdalpha.cwiseAbs()).maxCoeff();
}

double periodic_gap(double a, double b) { return std::abs(a - b - std::round(a - b)); }

Fn classical(double t) {
  return [t](double p, double a) { return hill_classical_melnikov(p, a, t); };
}

const LobeReport& region_at(const std::vector<LobeReport>& regions, const MelnikovField& f, double p, double alpha) {
  std::size_t bi = 0, bj = 0;
  for (std::size_t i = 0; i < f.n_p(); ++i)
    if (std::abs(f.p[i] - p) < std::abs(f.p[bi] - p)) bi = i;
  for (std::size_t j = 0; j < f.n_alpha(); ++j)
    if (periodic_gap(f.alpha[j], alpha) < periodic_gap(f.alpha[bj], alpha)) bj = j;
  for (const auto& r : regions)
    for (const auto& c : r.cells)
      if (c.first == bi && c.second == bj) return r;
  FAIL("no region at the requested point");
  return regions.front();
}

}  // namespace

TEST_CASE("classical zero set at t = 1 within one cell") {
  const double t = 1.0;
  const MelnikovField f = synthetic(classical(t), -2.0, 2.0, 81, 48, t);
  const ContourSet cs = zero_contours(f, auto_threshold(f));
  REQUIRE(cs.vertex_count() > 0);
  const auto lon = hill_zero_longitudes();
  const auto lat = hill_zero_latitudes(t, -2.0, 2.0);
  std::vector<int> lon_hits(lon.size(), 0), lat_hits(lat.size(), 0);
  int crossing = 0;
  for (const auto& c : cs.contours) {
    for (const auto& v : c.vertices) {
      bool near_lon = false, near_lat = false;
      for (std::size_t k = 0; k < lon.size(); ++k)
        if (periodic_gap(v.alpha, lon[k]) <= f.dalpha()) near_lon = true, ++lon_hits[k];
      for (std::size_t k = 0; k < lat.size(); ++k)
        if (std::abs(v.p - lat[k]) <= f.dp()) near_lat = true, ++lat_hits[k];
      CHECK((near_lon || near_lat));
      if (near_lon && near_lat) {
        ++crossing;
        CHECK(!v.transverse);
      }
      double dlat = 1e9, dlon = 1e9;
      for (double pk : lat) dlat = std::min(dlat, std::abs(v.p - pk));
      for (double ak : lon) dlon = std::min(dlon, periodic_gap(v.alpha, ak));
      if (dlat > 2 * f.dp() || dlon > 2 * f.dalpha()) CHECK(v.transverse);
    }
  }
  CHECK(crossing > 0);
  for (int h : lon_hits) CHECK(h > 10);
  for (int h : lat_hits) CHECK(h > 10);
}

TEST_CASE("longitude-latitude crossings are not transverse") {
  const double t = 1.0, dp = kPi / 40;
  // Nodes on every latitude t + (2k+1)π/8 and every longitude k/6.
  const double p0 = t - 7 * kPi / 8 - 4 * dp;
  const MelnikovField f = synthetic(classical(t), p0, p0 + 100 * dp, 101, 48, t);
  const ContourSet cs = zero_contours(f, auto_threshold(f));
  const auto lat = hill_zero_latitudes(t, f.p.front(), f.p.back());
  REQUIRE(lat.size() >= 4);
  int crossings = 0, regular = 0;
  for (const auto& c : cs.contours) {
    for (const auto& v : c.vertices) {
      double dlat = 1e9, dlon = 1e9;
      for (double pk : lat) dlat = std::min(dlat, std::abs(v.p - pk));
      for (double ak : hill_zero_longitudes()) dlon = std::min(dlon, periodic_gap(v.alpha, ak));
      // Grid vertices come no closer to a crossing than one cell.
      if (dlat <= dp * (1 + 1e-9) && dlon <= f.dalpha() * (1 + 1e-9)) {
        ++crossings;
        CHECK(!v.transverse);
      } else if (dlat > 2 * dp || dlon > 2 * f.dalpha()) {
        ++regular;
        CHECK(v.transverse);
      }
    }
  }
  CHECK(crossings > 0);
  CHECK(regular > 100);
}

TEST_CASE("contour vertices shrink with the grid and refine to roots") {
  const double t = 0.4;
  const Fn M = classical(t);
  double peak = 0.0, coarse = 0.0, fine = 0.0;
  for (int level = 0; level < 2; ++level) {
    const std::size_t np = level ? 401 : 201, na = level ? 384 : 192;
    const MelnikovField f = synthetic(M, -2.0, 2.0, np, na, t);
    peak = f.values.cwiseAbs().maxCoeff();
    double worst = 0.0;
    for (const auto& c : zero_contours(f, 0.0).contours)
      for (const auto& v : c.vertices) worst = std::max(worst, std::abs(M(v.p, v.alpha)));
    (level ? fine : coarse) = worst;
  }
  CHECK(coarse < 1e-3 * peak);
  CHECK(fine <= coarse / 2);

  const MelnikovField f = synthetic(M, -2.0, 2.0, 41, 30, t);
  ContourSet cs = zero_contours(f, 0.0);
  refine_contours(cs, f, M);
  for (const auto& c : cs.contours)
    for (const auto& v : c.vertices) CHECK(std::abs(M(v.p, v.alpha)) < 1e-12);
}

TEST_CASE("swirl contours follow the zero-curve equation") {
  const double R0 = 0.1, t = 1.0;
  const SwirlCoefficients k = hill_swirl_coefficients(R0);
  const Fn M = [&](double p, double a) { return hill_swirl_melnikov(k, p, a, t); };
  const MelnikovField f = synthetic(M, -2.0, 2.0, 161, 192, t);
  ContourSet cs = zero_contours(f, auto_threshold(f));
  REQUIRE(cs.vertex_count() > 100);
  // One cell of the normalized residual: its gradient is at most 6π in α and 4 in p.
  const double cell = 6 * kPi * f.dalpha() + 4 * f.dp();
  const auto residual = [&](const ContourVertex& v) {
    const double theta = std::acos(-std::tanh(1.5 * v.p));
    const double phi = kTwoPi * v.alpha - v.p / (2 * R0);
    return std::abs(hill_swirl_zero_residual(k, R0, theta, phi, t));
  };
  for (const auto& c : cs.contours)
    for (const auto& v : c.vertices) CHECK(residual(v) < cell);
  refine_contours(cs, f, M);
  for (const auto& c : cs.contours)
    for (const auto& v : c.vertices) CHECK(residual(v) < 1e-10);
}

TEST_CASE("checkerboard has four regions") {
  const MelnikovField f =
      synthetic([](double p, double a) { return std::sin(kTwoPi * a) * std::sin(kPi * p); }, 0.0, 2.0, 41, 40);
  const ContourSet cs = zero_contours(f, auto_threshold(f));
  const auto regions = lobe_regions(f, cs);
  REQUIRE(regions.size() == 4);
  int pos = 0;
  double sum = 0.0;
  for (const auto& r : regions) {
    pos += r.sign > 0;
    CHECK(!r.unbounded);
    CHECK(!r.boundary_contours.empty());
    for (const auto& [i, j] : r.cells) CHECK(f.values(i, j) * r.sign > 0.0);
    for (const auto& [i, j] : r.boundary_cells) {
      bool adjoins = false;
      for (const auto& [di, dj] : {std::pair{-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
        const long ii = static_cast<long>(i) + di;
        if (ii < 0 || ii >= 41) continue;
        const double v = f.at(static_cast<std::size_t>(ii), static_cast<long>(j) + dj);
        adjoins |= std::abs(v) <= zero_snap(f) || v * r.sign < 0.0;
      }
      CHECK(adjoins);
    }
    const LobeReport full = lobe_volume(f, r, 1.0);
    CHECK(full.abs_integral == doctest::Approx(2.0 / (kPi * kPi)).epsilon(5e-3));
    sum += full.abs_integral;
  }
  CHECK(pos == 2);
  // Partition consistency.
  CHECK(sum == doctest::Approx(signed_part_integral(f, 1) + signed_part_integral(f, -1)).epsilon(1e-12));
}

TEST_CASE("sign-definite fields") {
  const MelnikovField f = synthetic([](double p, double a) { return 2.0 + std::sin(3 * kTwoPi * a) + 0.1 * p; }, -1, 1, 21, 24);
  const ContourSet cs = zero_contours(f, auto_threshold(f));
  CHECK(cs.contours.empty());
  const auto regions = lobe_regions(f, cs);
  REQUIRE(regions.size() == 1);
  CHECK(regions[0].unbounded);
  CHECK(regions[0].cells.size() == 21 * 24);
  CHECK_THROWS_AS(lobe_volume(f, regions[0], 0.1), DomainError);
}

TEST_CASE("classical lobe volume") {
  const double eps = 0.1;
  double vols[2];
  for (int k = 0; k < 2; ++k) {
    const double t = k;
    const MelnikovField f =
        synthetic(classical(t), t + 3 * kPi / 8 - 0.15, t + 5 * kPi / 8 + 0.15, 121, 192, t);
    const auto regions = lobe_regions(f, zero_contours(f, auto_threshold(f)));
    const LobeReport& r = region_at(regions, f, t + kPi / 2, 1.0 / 12);
    CHECK(!r.unbounded);
    const LobeReport v = lobe_volume(f, r, eps);
    vols[k] = v.volume_leading;
    const double exact = eps * hill_lobe_integral();
    CHECK(std::abs(v.volume_leading - exact) < 1e-3 * exact);
    CHECK(v.volume_error_estimate > 0.0);
    CHECK(std::abs(v.volume_leading - exact) < 3 * v.volume_error_estimate);
    CHECK(lobe_volume(f, r, 2 * eps).volume_leading == 2 * v.volume_leading);
    CHECK(lobe_volume(f, r, -eps).volume_leading == v.volume_leading);
  }
  CHECK(vols[0] == doctest::Approx(vols[1]).epsilon(1e-3));
}
