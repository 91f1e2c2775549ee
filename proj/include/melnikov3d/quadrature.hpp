#pragma once

#include <cstddef>
#include <functional>
#include <string>

namespace melnikov3d {

enum class QuadratureRule { AdaptiveSimpson, GaussLegendre };

const char* to_string(QuadratureRule rule);
QuadratureRule quadrature_rule_from_string(const std::string& name);

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  ///< estimated absolute error
  std::size_t evaluations = 0;
};

using Integrand = std::function<double(double)>;

/// Adaptive Simpson with Richardson correction. The absolute target is
/// max(abs_tol, rel_tol · |I|), with I estimated on the initial panels (at least 64,
/// none wider than 1/8), and is
/// shared among panels in proportion to their length. Throws QuadratureError after `max_subdivisions` panel splits.
QuadratureResult adaptive_simpson(const Integrand& f, double a, double b, double abs_tol, double rel_tol,
                                  std::size_t max_subdivisions = 200000);

/// Composite 32-point Gauss–Legendre, doubling the panel count until two
/// successive sums agree to max(abs_tol, rel_tol · |value|).
QuadratureResult gauss_legendre(const Integrand& f, double a, double b, double abs_tol, double rel_tol,
                                std::size_t max_panels = 1 << 14);

/// Fixed composite Simpson with n (even) intervals.
double composite_simpson(const Integrand& f, double a, double b, std::size_t n);

QuadratureResult integrate(QuadratureRule rule, const Integrand& f, double a, double b, double abs_tol,
                           double rel_tol, std::size_t max_subdivisions);

}  // namespace melnikov3d
