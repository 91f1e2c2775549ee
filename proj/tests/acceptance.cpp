// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "melnikov3d/chart.hpp"
#include "melnikov3d/geometry.hpp"
#include "melnikov3d/heteroclinic.hpp"
#include "melnikov3d/hill_closed_form.hpp"
#include "melnikov3d/melnikov.hpp"
#include "melnikov3d/registry.hpp"
#include "melnikov3d/verification.hpp"

using namespace melnikov3d;

namespace {

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail, double seconds) {
  std::printf("[%s] %2d %-34s %s (%.1f s)\n", ok ? "PASS" : "FAIL", id, name, detail.c_str(), seconds);
  std::fflush(stdout);
  failures += !ok;
}

template <class Fn>
void criterion(int id, const char* name, Fn fn) {
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = false;
  try {
    ok = fn(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(id, name, ok, detail, s);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double sech(double x) { return 1.0 / std::cosh(x); }

// Trapezoid on [0, cut] for even, exponentially decaying analytic integrands.
double half_line(const std::function<double(double)>& f, double h, double cut = 40.0) {
  double s = 0.5 * f(0.0);
  for (int k = 1; k * h <= cut; ++k) s += f(k * h);
  return h * s;
}

double periodic_gap(double a, double b) { return std::abs(a - b - std::round(a - b)); }

const RadialGrPerturbation gr;

}  // namespace

int main() {
  const ChartPtr classical = hill_chart_classical();
  const unsigned threads = resolve_thread_count(0);
  MelnikovField field_t1;

  criterion(1, "classical closed form", [&](std::string& d) {
    double worst = 0.0;
    for (double t : {0.0, 1.0}) {
      MelnikovField f = build_melnikov_grid(*classical, gr, t, -2.0, 2.0, 200, 192, {}, MelnikovKind::Heteroclinic, threads);
      for (std::size_t i = 0; i < f.n_p(); ++i)
        for (std::size_t j = 0; j < f.n_alpha(); ++j)
          worst = std::max(worst, std::abs(f.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -
                                           hill_classical_melnikov(f.p[i], f.alpha[j], t)));
      if (t == 1.0) field_t1 = std::move(f);
    }
    d = fmt("200x192, t in {0,1}: max|M - closed| = %.2e (tol 1e-6), amplitude %.10f", worst, hill_classical_amplitude());
    return worst < 1e-6;
  });

  criterion(2, "base integral", [&](std::string& d) {
    const double q = half_line([](double x) { return std::pow(sech(1.5 * x), 3) * std::cos(4 * x); }, 0.005);
    const double closed = 73 * kPi / 54 * sech(4 * kPi / 3);
    const double e = std::max(std::abs(q - closed), std::abs(hill_base_integral() - closed));
    d = fmt("quadrature %.15f vs closed %.15f, diff %.2e (tol 1e-9)", q, closed, e);
    return e < 1e-9;
  });

  criterion(3, "swirl closed form, R0 = 0.1", [&](std::string& d) {
    const double R0 = 0.1, c = 1.5 / R0, t = 1.0;
    const auto w = [](double x) { return std::pow(sech(1.5 * x), 3); };
    const double A = half_line([&](double x) { return w(x) * std::cos(c * x) * std::cos(4 * x); }, 0.002);
    const double B = half_line([&](double x) { return w(x) * std::sin(c * x) * std::sin(4 * x); }, 0.002);
    const double scale = 6 * kPi * std::hypot(A, B);
    const ChartPtr swirl = hill_chart_swirl(R0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> up(-2, 2), ua(0, 1);
    double worst = 0.0;
    for (int n = 0; n < 100; ++n) {
      const double p = up(rng), a = ua(rng);
      const double ref = 6 * kPi * (A * std::sin(6 * kPi * a) * std::cos(4 * (p - t)) -
                                    B * std::cos(6 * kPi * a) * std::sin(4 * (p - t)));
      worst = std::max(worst, std::abs(melnikov_heteroclinic(*swirl, gr, p, a, t).value - ref) / scale);
    }
    d = fmt("A = %.6e, B = %.6e, max|M - closed| / (6pi |(A,B)|) = %.2e (tol 1e-8)", A, B, worst);
    return worst < 1e-8;
  });

  criterion(4, "zero set at t = 1", [&](std::string& d) {
    if (field_t1.n_p() == 0) field_t1 = build_melnikov_grid(*classical, gr, 1.0, -2.0, 2.0, 200, 192, {},
                                                            MelnikovKind::Heteroclinic, threads);
    const MelnikovField& f = field_t1;
    const double thr = 1e-6 * (f.dMdp.cwiseAbs() + f.dMdalpha.cwiseAbs()).maxCoeff();
    const ContourSet cs = zero_contours(f, thr);
    const auto lon = hill_zero_longitudes();
    const auto lat = hill_zero_latitudes(1.0, -2.0, 2.0);
    std::vector<int> lon_hits(lon.size(), 0), lat_hits(lat.size(), 0);
    std::size_t stray = 0;
    int lon_lines = 0, lat_lines = 0;
    for (const auto& c : cs.contours) {
      std::vector<bool> all_lon(lon.size(), true), all_lat(lat.size(), true);
      for (const auto& v : c.vertices) {
        bool near = false;
        for (std::size_t k = 0; k < lon.size(); ++k) {
          const bool h = periodic_gap(v.alpha, lon[k]) <= f.dalpha();
          lon_hits[k] += h;
          near |= h;
          all_lon[k] = all_lon[k] && h;
        }
        for (std::size_t k = 0; k < lat.size(); ++k) {
          const bool h = std::abs(v.p - lat[k]) <= f.dp();
          lat_hits[k] += h;
          near |= h;
          all_lat[k] = all_lat[k] && h;
        }
        stray += !near;
      }
      for (bool b : all_lon) lon_lines += b;
      for (bool b : all_lat) lat_lines += b;
    }
    bool covered = true;
    for (int h : lon_hits) covered &= h > 0;
    for (int h : lat_hits) covered &= h > 0;
    d = "vertices off the zero set by more than one cell: " + std::to_string(stray) + " of " +
        std::to_string(cs.vertex_count()) + "; polylines: " + std::to_string(lon_lines) + " longitudes, " +
        std::to_string(lat_lines) + " latitudes (expect 6, " + std::to_string(lat.size()) + ")";
    return stray == 0 && covered && lon_lines == 6 && lat_lines == static_cast<int>(lat.size());
  });

  criterion(5, "lobe volume, 400x384", [&](std::string& d) {
    const double eps = 0.1, exact = eps * hill_lobe_integral();
    double vol[2] = {0, 0};
    bool ok = true;
    for (int k = 0; k < 2; ++k) {
      const double t = k;
      const MelnikovField f = build_melnikov_grid(*classical, gr, t, t + 3 * kPi / 8 - 0.15, t + 5 * kPi / 8 + 0.15,
                                                  400, 384, {}, MelnikovKind::Heteroclinic, threads);
      const auto regions = lobe_regions(f, zero_contours(f, 0.0));
      // The region holding the node nearest (t + π/2, 1/12).
      std::size_t bi = 0;
      for (std::size_t i = 0; i < f.n_p(); ++i)
        if (std::abs(f.p[i] - (t + kPi / 2)) < std::abs(f.p[bi] - (t + kPi / 2))) bi = i;
      const std::size_t bj = static_cast<std::size_t>(std::lround(f.n_alpha() / 12.0));
      const LobeReport* lobe = nullptr;
      for (const auto& r : regions)
        for (const auto& c : r.cells)
          if (c.first == bi && c.second == bj) lobe = &r;
      if (!lobe || lobe->unbounded) return d = "lobe not found or unbounded", false;
      vol[k] = lobe_volume(f, *lobe, eps).volume_leading;
      ok &= std::abs(vol[k] - exact) < 1e-3 * exact;
    }
    const double spread = std::abs(vol[0] - vol[1]) / exact;
    d = fmt("t=0: %.9f, t=1: %.9f, exact %.9f", vol[0], vol[1], exact) +
        fmt(", rel errors %.2e / %.2e, t-spread %.2e (tol 1e-3)", std::abs(vol[0] - exact) / exact,
            std::abs(vol[1] - exact) / exact, spread);
    return ok && spread < 1e-3;
  });

  criterion(6, "full line = unstable - stable", [&](std::string& d) {
    const QuadratureSpec q;
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> up(-2, 2), ua(0, 1), ut(-2, 2);
    double worst = 0.0;
    for (const ChartPtr& c : {classical, hill_chart_swirl(0.1)}) {
      for (int n = 0; n < 100; ++n) {
        const double p = up(rng), a = ua(rng), t = ut(rng);
        const double M = melnikov_heteroclinic(*c, gr, p, a, t, q).value;
        const double Mu = melnikov_unstable(*c, gr, p, a, t, q).value;
        const double Ms = melnikov_stable(*c, gr, p, a, t, q).value;
        worst = std::max(worst, std::abs(M - (Mu - Ms)) / (q.abs_tol + q.rel_tol * std::abs(M)));
      }
    }
    d = fmt("200 points on both Hill models: max residual = %.2f x quadrature tolerance (tol 10)", worst);
    return worst < 10.0;
  });

  criterion(7, "order in eps of the oracle", [&](std::string& d) {
    const std::vector<std::array<double, 3>> pts = {
        {0.0, 1.0 / 12, 0.0}, {0.5, 0.1, 0.2}, {-0.5, 0.4, 1.0}, {1.0, 0.25, 0.3}, {0.2, 0.9, -0.7}};
    double lo = 1e9, hi = -1e9;
    bool ok = true;
    for (const auto& q : pts) {
      std::vector<DisplacementSample> s;
      for (double e : {1e-2, 3e-3, 1e-3}) s.push_back(measure_displacement(*classical, gr, e, q[0], q[1], q[2], q[0] - 6.0));
      const OrderFit f = fit_order(s);
      ok &= !f.saturated;
      lo = std::min(lo, f.slope);
      hi = std::max(hi, f.slope);
    }
    d = fmt("5 tuples: slopes in [%.3f, %.3f] (need [1.7, 2.3])", lo, hi);
    return ok && lo >= 1.7 && hi <= 2.3;
  });

  criterion(8, "triple identity, 10^4 cases", [&](std::string& d) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> mag(-3.0, 3.0);
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
      const double s = std::pow(10.0, mag(rng));
      Mat3 A;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) A(i, j) = s * n(rng);
      const Vec3 b(n(rng), n(rng), n(rng)), c(n(rng), n(rng), n(rng)), e(n(rng), n(rng), n(rng));
      // Relative to the size of the terms that cancel.
      const double scale = A.norm() * b.norm() * c.norm() * e.norm();
      worst = std::max(worst, std::abs(triple_identity_residual(A, b, c, e)) / scale);
    }
    d = fmt("max relative residual %.2e (tol 1e-12)", worst);
    return worst < 1e-12;
  });

  criterion(9, "integrand decay rate", [&](std::string& d) {
    double worst = -1e9;
    for (const auto& q : {std::array<double, 3>{0.0, 1.0 / 12, 0.0}, {0.7, 0.3, 0.4}}) {
      const DecayFit f = fit_lower_tail_decay(*classical, gr, q[0], q[1], q[2], 3.0, 10.0);
      worst = std::max(worst, f.rate);
    }
    d = fmt("fitted rate %.3f (need <= -2.9)", worst);
    return worst <= -2.9;
  });

  criterion(10, "generic chart equivalence", [&](std::string& d) {
    const ChartPtr g = make_chart(make_field("hill-classical"), "generic");
    double wx = 0.0, wm = 0.0;
    for (int i = 0; i <= 40; ++i) {
      const double p = -2.0 + 0.1 * i;
      for (int j = 0; j < 24; ++j) {
        const double a = (j + 0.37) / 24.0;
        wx = std::max(wx, (g->point(p, a) - classical->point(p, a)).norm());
      }
    }
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> up(-2, 2), ua(0, 1), ut(-1, 1);
    for (int n = 0; n < 30; ++n) {
      const double p = up(rng), a = ua(rng), t = ut(rng);
      wm = std::max(wm, std::abs(melnikov_heteroclinic(*g, gr, p, a, t).value -
                                 melnikov_heteroclinic(*classical, gr, p, a, t).value));
    }
    d = fmt("max chart distance %.2e (tol 1e-6), max |M_generic - M_analytic| %.2e (tol 1e-5)", wx, wm);
    return wx < 1e-6 && wm < 1e-5;
  });

  std::printf("%s: %d of 10 criteria failed\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
