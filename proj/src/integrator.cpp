#include "melnikov3d/integrator.hpp"

#include <algorithm>
#include <cmath>

namespace melnikov3d {

namespace {

using Packed = Trajectory::Packed;

// Dormand–Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension (Hairer, Nørsett & Wanner).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

AugmentedState unpack(const Packed& y) { return {y.head<3>(), y[3], y[4]}; }

}  // namespace

std::vector<Vec3> Trajectory::states() const {
  std::vector<Vec3> out;
  out.reserve(samples_.size());
  for (const auto& s : samples_) out.emplace_back(s.head<3>());
  return out;
}

std::vector<double> Trajectory::divergence_integrals() const {
  std::vector<double> out;
  out.reserve(samples_.size());
  for (const auto& s : samples_) out.push_back(s[3]);
  return out;
}

bool Trajectory::contains(double t) const {
  if (times_.empty()) return false;
  return direction_ > 0 ? (t >= times_.front() && t <= times_.back())
                        : (t <= times_.front() && t >= times_.back());
}

AugmentedState Trajectory::back() const { return unpack(samples_.back()); }

AugmentedState Trajectory::at(double t) const {
  if (!contains(t)) throw DomainError("Trajectory::at: time outside integrated interval");
  if (times_.size() == 1) return unpack(samples_.front());
  // Index of the step whose interval contains t.
  std::size_t k;
  if (direction_ > 0) {
    k = static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin());
  } else {
    k = static_cast<std::size_t>(
        std::upper_bound(times_.begin(), times_.end(), t, std::greater<double>()) - times_.begin());
  }
  k = std::clamp<std::size_t>(k, 1, times_.size() - 1) - 1;
  const double h = times_[k + 1] - times_[k];
  const double theta = (t - times_[k]) / h;
  const double theta1 = 1.0 - theta;
  const auto& r = dense_[k];
  const Packed y = r.col(0) + theta * (r.col(1) + theta1 * (r.col(2) + theta * (r.col(3) + theta1 * r.col(4))));
  return unpack(y);
}

DormandPrince45::DormandPrince45(const FieldModel& field, const PerturbationModel* perturbation, double eps,
                                 IntegratorOptions options)
    : field_(field), perturbation_(perturbation), eps_(perturbation ? eps : 0.0), options_(options) {
  if (!(options_.tol > 0.0)) throw ConfigError("integrator tolerance must be positive");
  if (!std::isfinite(eps_)) throw ConfigError("eps must be finite");
}

Packed DormandPrince45::rhs(double t, const Packed& y) const {
  const Vec3 x = y.head<3>();
  Vec3 v = field_.evaluate(x);
  if (eps_ != 0.0) v += eps_ * perturbation_->evaluate(x, t);
  Packed out;
  out.head<3>() = v;
  out[3] = field_.known_volume_preserving() ? 0.0 : field_.divergence(x);
  out[4] = v.norm();
  return out;
}

Trajectory DormandPrince45::run(const Vec3& x0, double t0, double t1, const StopPredicate& stop) const {
  if (!all_finite(x0) || !std::isfinite(t0) || !std::isfinite(t1))
    throw DomainError("integrate: non-finite initial data");
  Trajectory traj;
  traj.direction_ = t1 >= t0 ? 1.0 : -1.0;
  const double dir = traj.direction_;
  Packed y;
  y << x0, 0.0, 0.0;
  traj.times_.push_back(t0);
  traj.samples_.push_back(y);
  if (t1 == t0) return traj;

  const double tol = options_.tol;
  auto scale = [tol](const Packed& a, const Packed& b) {
    return (tol + tol * a.cwiseAbs().cwiseMax(b.cwiseAbs()).array()).matrix();
  };

  IntegratorStats& stats = traj.stats_;
  double t = t0;
  Packed k1 = rhs(t, y);
  stats.rhs_evaluations = 1;

  // Initial step from the ratio of state to slope magnitudes.
  double h;
  {
    const Packed sc = scale(y, y);
    const double d0 = (y.array() / sc.array()).matrix().norm();
    const double d1 = (k1.array() / sc.array()).matrix().norm();
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min({h, options_.max_step, std::abs(t1 - t0)});
  }

  bool last_rejected = false;
  while (dir * (t1 - t) > 0.0) {
    if (stats.accepted + stats.rejected >= options_.max_steps) throw IntegrationError("integrate: too many steps");
    bool final_step = false;
    if (h >= std::abs(t1 - t)) {
      h = std::abs(t1 - t);
      final_step = true;
    }
    const double hs = dir * h;
    if (h < 1e-14 * std::max(1.0, std::abs(t))) throw IntegrationError("integrate: step size underflow");

    const Packed k2 = rhs(t + c2 * hs, y + hs * (a21 * k1));
    const Packed k3 = rhs(t + c3 * hs, y + hs * (a31 * k1 + a32 * k2));
    const Packed k4 = rhs(t + c4 * hs, y + hs * (a41 * k1 + a42 * k2 + a43 * k3));
    const Packed k5 = rhs(t + c5 * hs, y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Packed k6 = rhs(t + hs, y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Packed y_new = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const double t_new = final_step ? t1 : t + hs;
    const Packed k7 = rhs(t_new, y_new);
    stats.rhs_evaluations += 6;

    const Packed err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double err_norm = (err.array() / scale(y, y_new).array()).abs().maxCoeff();

    if (!std::isfinite(err_norm)) {
      h *= 0.25;
      ++stats.rejected;
      last_rejected = true;
      continue;
    }
    if (err_norm <= 1.0) {
      Eigen::Matrix<double, 5, 5> dense;
      const Packed dy = y_new - y;
      dense.col(0) = y;
      dense.col(1) = dy;
      dense.col(2) = hs * k1 - dy;
      dense.col(3) = dy - hs * k7 - dense.col(2);
      dense.col(4) = hs * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      traj.dense_.push_back(dense);
      traj.times_.push_back(t_new);
      traj.samples_.push_back(y_new);
      ++stats.accepted;
      t = t_new;
      y = y_new;
      k1 = k7;
      if (y.head<3>().norm() > options_.blowup_radius) throw IntegrationError("integrate: trajectory blow-up");
      if (stop && stop(t, unpack(y))) break;
      double factor = err_norm == 0.0 ? 5.0 : 0.9 * std::pow(err_norm, -0.2);
      factor = std::clamp(factor, 0.2, last_rejected ? 1.0 : 5.0);
      h = std::min(h * factor, options_.max_step);
      last_rejected = false;
    } else {
      ++stats.rejected;
      h *= std::max(0.2, 0.9 * std::pow(err_norm, -0.2));
      last_rejected = true;
    }
  }
  return traj;
}

Trajectory integrate(const FieldModel& field, const PerturbationModel* perturbation, double eps,
                     const Vec3& x0, double t0, double t1, double tol) {
  IntegratorOptions opts;
  opts.tol = tol;
  return DormandPrince45(field, perturbation, eps, opts).run(x0, t0, t1);
}

Vec3 integrate_rk4(const FieldModel& field, const PerturbationModel* perturbation, double eps,
                   const Vec3& x0, double t0, double t1, std::size_t steps) {
  if (steps == 0) throw ConfigError("integrate_rk4: need at least one step");
  const double e = perturbation ? eps : 0.0;
  auto f = [&](double t, const Vec3& x) -> Vec3 {
    Vec3 v = field.evaluate(x);
    if (e != 0.0) v += e * perturbation->evaluate(x, t);
    return v;
  };
  const double h = (t1 - t0) / static_cast<double>(steps);
  Vec3 x = x0;
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = t0 + static_cast<double>(i) * h;
    const Vec3 k1 = f(t, x);
    const Vec3 k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
    const Vec3 k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
    const Vec3 k4 = f(t + h, x + h * k3);
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

}  // namespace melnikov3d
