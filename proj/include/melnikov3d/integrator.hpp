#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "melnikov3d/field_models.hpp"

namespace melnikov3d {

struct IntegratorOptions {
  double tol = 1e-10;  ///< local error per step, mixed absolute/relative
  double max_step = 0.5;
  double blowup_radius = 1e6;
  std::size_t max_steps = 2'000'000;
};

struct IntegratorStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evaluations = 0;
};

/// Position plus the two scalar accumulators integrated alongside it.
struct AugmentedState {
  Vec3 x = Vec3::Zero();
  double divergence_integral = 0.0;  ///< ∫ ∇·f(x(s)) ds from the start
  double arc_length = 0.0;
};

/// Dense-output solution of ẋ = f(x) + ε g(x, t) from a Dormand–Prince 5(4) run.
class Trajectory {
 public:
  using Packed = Eigen::Matrix<double, 5, 1>;

  const std::vector<double>& times() const { return times_; }
  std::vector<Vec3> states() const;
  std::vector<double> divergence_integrals() const;
  const IntegratorStats& stats() const { return stats_; }

  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  /// +1 for forward-in-time integration, −1 for backward.
  double direction() const { return direction_; }
  bool contains(double t) const;

  /// Continuous extension; throws DomainError outside [t_begin, t_end].
  AugmentedState at(double t) const;
  Vec3 state_at(double t) const { return at(t).x; }
  AugmentedState back() const;

 private:
  friend class DormandPrince45;

  double direction_ = 1.0;
  std::vector<double> times_;
  std::vector<Packed> samples_;
  // Per step: columns are the five Hairer dense-output coefficient vectors.
  std::vector<Eigen::Matrix<double, 5, 5>> dense_;
  IntegratorStats stats_;
};

/// Returning true after an accepted step ends the integration there.
using StopPredicate = std::function<bool(double t, const AugmentedState& state)>;

class DormandPrince45 {
 public:
  DormandPrince45(const FieldModel& field, const PerturbationModel* perturbation, double eps,
                  IntegratorOptions options = {});

  Trajectory run(const Vec3& x0, double t0, double t1, const StopPredicate& stop = {}) const;

 private:
  Trajectory::Packed rhs(double t, const Trajectory::Packed& y) const;

  const FieldModel& field_;
  const PerturbationModel* perturbation_;
  double eps_;
  IntegratorOptions options_;
};

/// Integrates ẋ = f + εg from (x0, t0) to t1. Without a perturbation ε is
/// treated as 0. The divergence of f is accumulated as an extra state.
Trajectory integrate(const FieldModel& field, const PerturbationModel* perturbation, double eps,
                     const Vec3& x0, double t0, double t1, double tol);

/// Fixed-step classical RK4 for cross-checks; returns the end point.
Vec3 integrate_rk4(const FieldModel& field, const PerturbationModel* perturbation, double eps,
                   const Vec3& x0, double t0, double t1, std::size_t steps);

}  // namespace melnikov3d
