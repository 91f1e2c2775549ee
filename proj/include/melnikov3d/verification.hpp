#pragma once

#include <cmath>
#include <vector>

#include "melnikov3d/melnikov.hpp"

namespace melnikov3d {

struct DisplacementSample {
  MelnikovKind kind = MelnikovKind::Unstable;
  double p = 0.0, alpha = 0.0, t = 0.0, eps = 0.0;
  double p_launch = 0.0;
  double measured_d = 0.0;
  double predicted_d = 0.0;
  double melnikov = 0.0;
  double seeding_error_estimate = 0.0;

  double error() const { return std::abs(measured_d - predicted_d); }
};

struct OracleOptions {
  double tol = 1e-12;  ///< integrator tolerance
  QuadratureSpec quad{};
};

/// Integrates ẋ = f + εg from a seed on the unperturbed manifold and measures
/// the normal offset from x̄(p, α) at time t.
///
/// Unstable: seed x̄(p_launch, α) at time t − (p − p_launch), forward to t;
/// requires p_launch ≤ p − 5/|Re λ| of the upstream saddle's pair.
/// Stable: seed x̄(p_launch, α) at time t + (p_launch − p), backward to t;
/// requires p_launch ≥ p + 5/|Re λ| of the downstream pair.
/// Heteroclinic: unstable minus stable offset, launching the stable run at
/// 2p − p_launch; predicted from the full-line M.
/// The seeding error estimate is the geometric tail e1 / (1 − e2/e1) of the
/// changes e1, e2 under launches one and two units deeper; e1 + e2 when the
/// changes do not shrink.
DisplacementSample measure_displacement(const ManifoldChart& chart, const PerturbationModel& g, double eps, double p,
                                        double alpha, double t, double p_launch,
                                        MelnikovKind kind = MelnikovKind::Unstable, const OracleOptions& opt = {});

struct OrderFit {
  std::vector<double> eps;
  std::vector<double> errors;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  /// Some error is at the integrator noise floor; slope is not meaningful.
  bool saturated = false;
};

/// Least-squares slope of log|measured − predicted| against log ε. Needs at
/// least three distinct ε spanning a decade.
OrderFit fit_order(const std::vector<DisplacementSample>& samples, double noise_floor = 1e-11);

/// Least-squares fit of log errors[i] against log eps[i].
OrderFit fit_order(const std::vector<double>& eps, const std::vector<double>& errors, double noise_floor = 1e-11);

}  // namespace melnikov3d
