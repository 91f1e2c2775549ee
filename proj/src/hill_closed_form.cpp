#include "melnikov3d/hill_closed_form.hpp"

#include <cmath>

#include "melnikov3d/errors.hpp"
#include "melnikov3d/geometry.hpp"
#include "melnikov3d/quadrature.hpp"

namespace melnikov3d {

double hill_base_integral() { return 73.0 * kPi / 54.0 / std::cosh(4.0 * kPi / 3.0); }

double hill_classical_amplitude() { return 73.0 * kPi * kPi / 9.0 / std::cosh(4.0 * kPi / 3.0); }

double hill_classical_melnikov(double p, double alpha, double t) {
  return hill_classical_amplitude() * std::sin(6.0 * kPi * alpha) * std::cos(4.0 * (p - t));
}

SwirlCoefficients hill_swirl_coefficients(double R0) {
  if (!(R0 > 0.0)) throw DomainError("swirl coefficients need R0 > 0");
  const double w = 1.5 / R0;
  auto sech3 = [](double tau) {
    const double s = 1.0 / std::cosh(1.5 * tau);
    return s * s * s;
  };
  SwirlCoefficients c;
  c.A = gauss_legendre([&](double tau) { return sech3(tau) * std::cos(w * tau) * std::cos(4.0 * tau); }, 0.0, 40.0,
                       1e-16, 1e-14)
            .value;
  c.B = gauss_legendre([&](double tau) { return sech3(tau) * std::sin(w * tau) * std::sin(4.0 * tau); }, 0.0, 40.0,
                       1e-16, 1e-14)
            .value;
  return c;
}

double hill_swirl_melnikov(const SwirlCoefficients& c, double p, double alpha, double t) {
  const double a = 6.0 * kPi * alpha, q = 4.0 * (p - t);
  return 6.0 * kPi * (c.A * std::sin(a) * std::cos(q) - c.B * std::cos(a) * std::sin(q));
}

double hill_swirl_zero_residual(const SwirlCoefficients& c, double R0, double theta, double phi, double t) {
  const double p = -2.0 / 3.0 * std::atanh(std::cos(theta));
  const double a = 3.0 * phi + 1.5 * p / R0;
  const double q = 4.0 * (p - t);
  return (c.A * std::sin(a) * std::cos(q) - c.B * std::cos(a) * std::sin(q)) / std::hypot(c.A, c.B);
}

std::vector<double> hill_zero_longitudes() { return {0.0, 1.0 / 6, 1.0 / 3, 0.5, 2.0 / 3, 5.0 / 6}; }

std::vector<double> hill_zero_latitudes(double t, double p_min, double p_max) {
  std::vector<double> out;
  const auto k0 = static_cast<long>(std::floor((p_min - t) * 4.0 / kPi - 0.5)) - 1;
  for (long k = k0;; ++k) {
    const double pk = t + (2.0 * static_cast<double>(k) + 1.0) * kPi / 8.0;
    if (pk > p_max) break;
    if (pk >= p_min) out.push_back(pk);
  }
  return out;
}

double hill_lobe_integral() {
  // ∫₀^{1/6} sin6πα dα = 1/(3π) and ∫ over a half period of |cos4(p−t)| = 1/2.
  return hill_classical_amplitude() / (6.0 * kPi);
}

}  // namespace melnikov3d
