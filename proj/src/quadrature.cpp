#include "melnikov3d/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "melnikov3d/errors.hpp"

namespace melnikov3d {

const char* to_string(QuadratureRule rule) {
  return rule == QuadratureRule::AdaptiveSimpson ? "adaptive-simpson" : "gauss-legendre";
}

QuadratureRule quadrature_rule_from_string(const std::string& name) {
  if (name == "adaptive-simpson" || name == "simpson") return QuadratureRule::AdaptiveSimpson;
  if (name == "gauss-legendre" || name == "gl") return QuadratureRule::GaussLegendre;
  throw ConfigError("unknown quadrature rule '" + name + "'");
}

namespace {

void check_interval(double a, double b, double abs_tol, double rel_tol) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw DomainError("quadrature: interval must be finite");
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw ConfigError("quadrature: tolerances must be positive");
}

struct Panel {
  double a, b;
  double fa, fm, fb;
  double whole;
};

}  // namespace

QuadratureResult adaptive_simpson(const Integrand& f, double a, double b, double abs_tol, double rel_tol,
                                  std::size_t max_subdivisions) {
  check_interval(a, b, abs_tol, rel_tol);
  QuadratureResult res;
  if (a == b) return res;
  const double len = b - a;

  // Initial uniform panels; their Richardson-corrected sum sets the relative scale.
  // At least 64 panels and none wider than 1/8, so that integrands oscillating
  // on unit scales are resolved before the first acceptance test.
  const std::size_t n0 = std::max<std::size_t>(64, static_cast<std::size_t>(std::ceil(std::abs(len) / 0.125)));
  const double h0 = len / static_cast<double>(n0);
  std::vector<double> grid(2 * n0 + 1);
  for (std::size_t i = 0; i <= 2 * n0; ++i) grid[i] = f(a + 0.5 * h0 * static_cast<double>(i));
  res.evaluations = 2 * n0 + 1;
  double coarse = 0.0, coarser = 0.0;
  std::vector<Panel> stack;
  stack.reserve(256);
  for (std::size_t i = 0; i < n0; ++i) {
    const double pa = a + h0 * static_cast<double>(i);
    const double pb = i + 1 == n0 ? b : pa + h0;
    Panel p{pa, pb, grid[2 * i], grid[2 * i + 1], grid[2 * i + 2], 0.0};
    p.whole = (pb - pa) / 6.0 * (p.fa + 4.0 * p.fm + p.fb);
    coarse += p.whole;
    if (i % 2 == 0 && i + 1 < n0) coarser += 2.0 * (pb - pa) / 6.0 * (p.fa + 4.0 * p.fb + grid[2 * i + 4]);
    stack.push_back(p);
  }
  const double tol = std::max(abs_tol, rel_tol * std::abs(coarse + (coarse - coarser) / 15.0));
  const double tol_density = tol / std::abs(len);

  std::size_t splits = 0;
  while (!stack.empty()) {
    Panel p = stack.back();
    stack.pop_back();
    const double m = 0.5 * (p.a + p.b);
    const double flm = f(0.5 * (p.a + m));
    const double frm = f(0.5 * (m + p.b));
    res.evaluations += 2;
    const double left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
    const double right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
    const double refined = left + right;
    const double diff = refined - p.whole;
    const double panel_tol = tol_density * std::abs(p.b - p.a);
    if (std::abs(diff) <= 15.0 * panel_tol || std::abs(p.b - p.a) < 1e-12 * std::abs(len)) {
      res.value += refined + diff / 15.0;
      res.error += std::abs(diff) / 15.0;
      continue;
    }
    if (++splits > max_subdivisions) throw QuadratureError("adaptive Simpson: subdivision limit reached");
    stack.push_back({m, p.b, p.fm, frm, p.fb, right});
    stack.push_back({p.a, m, p.fa, flm, p.fm, left});
  }
  if (!std::isfinite(res.value)) throw QuadratureError("adaptive Simpson: non-finite integrand");
  return res;
}

namespace {

struct GaussLegendre32 {
  std::array<double, 32> x{}, w{};
  GaussLegendre32() {
    const int n = 32;
    for (int i = 0; i < n / 2; ++i) {
      double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[i] = -z;
      x[n - 1 - i] = z;
      w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }
};

const GaussLegendre32& gl32() {
  static const GaussLegendre32 rule;
  return rule;
}

double gl_composite(const Integrand& f, double a, double b, std::size_t panels) {
  const auto& r = gl32();
  const double h = (b - a) / static_cast<double>(panels);
  double sum = 0.0;
  for (std::size_t i = 0; i < panels; ++i) {
    const double c = a + h * (static_cast<double>(i) + 0.5);
    double s = 0.0;
    for (int k = 0; k < 32; ++k) s += r.w[k] * f(c + 0.5 * h * r.x[k]);
    sum += 0.5 * h * s;
  }
  return sum;
}

}  // namespace

QuadratureResult gauss_legendre(const Integrand& f, double a, double b, double abs_tol, double rel_tol,
                                std::size_t max_panels) {
  check_interval(a, b, abs_tol, rel_tol);
  QuadratureResult res;
  if (a == b) return res;
  std::size_t panels = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::abs(b - a) / 4.0)));
  double prev = gl_composite(f, a, b, panels);
  res.evaluations = 32 * panels;
  while (true) {
    panels *= 2;
    if (panels > max_panels) throw QuadratureError("Gauss-Legendre: panel limit reached");
    const double next = gl_composite(f, a, b, panels);
    res.evaluations += 32 * panels;
    const double diff = std::abs(next - prev);
    prev = next;
    if (diff <= std::max(abs_tol, rel_tol * std::abs(next))) {
      res.value = next;
      res.error = diff;
      break;
    }
  }
  if (!std::isfinite(res.value)) throw QuadratureError("Gauss-Legendre: non-finite integrand");
  return res;
}

double composite_simpson(const Integrand& f, double a, double b, std::size_t n) {
  if (n < 2 || n % 2 != 0) throw ConfigError("composite Simpson needs an even interval count");
  const double h = (b - a) / static_cast<double>(n);
  double s = f(a) + f(b);
  for (std::size_t i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
  return s * h / 3.0;
}

QuadratureResult integrate(QuadratureRule rule, const Integrand& f, double a, double b, double abs_tol,
                           double rel_tol, std::size_t max_subdivisions) {
  if (rule == QuadratureRule::AdaptiveSimpson) return adaptive_simpson(f, a, b, abs_tol, rel_tol, max_subdivisions);
  return gauss_legendre(f, a, b, abs_tol, rel_tol);
}

}  // namespace melnikov3d
