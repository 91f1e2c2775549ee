#include "melnikov3d/field_models.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace melnikov3d {

Mat3 FieldModel::jacobian(const Vec3& x) const {
  const double h = 1e-6 * std::max(1.0, x.norm());
  const int branch = branch_at(x);
  Mat3 J;
  for (int j = 0; j < 3; ++j) {
    Vec3 step = Vec3::Zero();
    step[j] = h;
    J.col(j) = (evaluate_branch(x + step, branch) - evaluate_branch(x - step, branch)) / (2.0 * h);
  }
  return J;
}

double FieldModel::divergence(const Vec3& x) const { return jacobian(x).trace(); }

Vec3 SphericalFieldModel::evaluate(const Vec3& x) const { return evaluate_branch(x, branch_at(x)); }

Vec3 SphericalFieldModel::evaluate_branch(const Vec3& x, int branch) const {
  const SphericalPoint p = cartesian_to_spherical(x);
  // The frame is well defined on the axis; the built-in fields' θ̂ and φ̂
  // components carry a sinθ factor so the result does not depend on φ there.
  return spherical_frame(p.theta, p.phi) * evaluate_spherical(p, branch);
}

namespace {

// r, sinθ, cosθ, cosφ, sinφ from Cartesian ratios; φ = 0 on the axis as in
// cartesian_to_spherical.
struct Ratios {
  double r, st, ct, cp, sp;
};

Ratios ratios(const Vec3& x) {
  const double rho2 = x.x() * x.x() + x.y() * x.y();
  const double rho = std::sqrt(rho2);
  const double r = std::sqrt(rho2 + x.z() * x.z());
  Ratios q{r, 0.0, 1.0, 1.0, 0.0};
  if (r > 0.0) {
    q.st = rho / r;
    q.ct = x.z() / r;
  }
  if (rho > 0.0) {
    q.cp = x.x() / rho;
    q.sp = x.y() / rho;
  }
  return q;
}

Vec3 to_cartesian(const Vec3& v, const Ratios& q) {
  return {v[0] * q.st * q.cp + v[1] * q.ct * q.cp - v[2] * q.sp,
          v[0] * q.st * q.sp + v[1] * q.ct * q.sp + v[2] * q.cp, v[0] * q.ct - v[1] * q.st};
}

Vec3 hill_interior(double r, double st, double ct) {
  return {1.5 * ct * (1.0 - r * r), -1.5 * st * (1.0 - 2.0 * r * r), 0.0};
}

Vec3 hill_exterior(double r, double st, double ct) {
  const double r3 = r * r * r;
  return {-ct * (1.0 - 1.0 / r3), st * (1.0 + 0.5 / r3), 0.0};
}

Vec3 swirl_components(double r, double st, double ct, double R0, int branch) {
  const double f_phi = -r * st / (2.0 * R0);
  if (branch == 0) {
    Vec3 v = hill_interior(r, st, ct);
    v.z() = f_phi;
    return v;
  }
  const double arg = (r - 1.0) / R0;
  const double c = std::cos(arg), s = std::sin(arg);
  const double r2 = r * r, r3 = r2 * r;
  const double f_r = -ct * (1.0 - c / r2 + R0 * s / r3);
  const double f_theta = st / (2.0 * r) * (2.0 * r + c / r + (1.0 / R0 - R0 / r2) * s);
  return {f_r, f_theta, f_phi};
}

}  // namespace

Vec3 hill_classical_eval(const SphericalPoint& x) {
  const double st = std::sin(x.theta), ct = std::cos(x.theta);
  return x.r <= 1.0 ? hill_interior(x.r, st, ct) : hill_exterior(x.r, st, ct);
}

Vec3 hill_swirl_eval(const SphericalPoint& x, double R0) {
  if (!(R0 > 0.0)) throw DomainError("hill-swirl requires R0 > 0");
  return swirl_components(x.r, std::sin(x.theta), std::cos(x.theta), R0, x.r <= 1.0 ? 0 : 1);
}

Vec3 HillClassicalField::evaluate_spherical(const SphericalPoint& p, int branch) const {
  const double st = std::sin(p.theta), ct = std::cos(p.theta);
  return branch == 0 ? hill_interior(p.r, st, ct) : hill_exterior(p.r, st, ct);
}

Vec3 HillClassicalField::evaluate_branch(const Vec3& x, int branch) const {
  const Ratios q = ratios(x);
  return to_cartesian(branch == 0 ? hill_interior(q.r, q.st, q.ct) : hill_exterior(q.r, q.st, q.ct), q);
}

Vec3 HillSwirlField::evaluate_branch(const Vec3& x, int branch) const {
  const Ratios q = ratios(x);
  return to_cartesian(swirl_components(q.r, q.st, q.ct, R0_, branch), q);
}

HillSwirlField::HillSwirlField(double R0) : R0_(R0) {
  if (!(R0 > 0.0) || !std::isfinite(R0)) throw DomainError("hill-swirl requires finite R0 > 0");
}

Vec3 HillSwirlField::evaluate_spherical(const SphericalPoint& p, int branch) const {
  return swirl_components(p.r, std::sin(p.theta), std::cos(p.theta), R0_, branch);
}

LinearSaddleField::LinearSaddleField(double plane_rate, double rotation, double normal_rate) {
  matrix_ << plane_rate, -rotation, 0.0, rotation, plane_rate, 0.0, 0.0, 0.0, normal_rate;
  if (!all_finite(matrix_)) throw DomainError("linear-saddle parameters must be finite");
}

ModelParams LinearSaddleField::parameters() const {
  return {{"l", matrix_(0, 0)}, {"omega", matrix_(1, 0)}, {"s", matrix_(2, 2)}};
}

Vec3 perturbation_gr_eval(const SphericalPoint& x, double t) {
  return {x.r * x.r * std::sin(x.theta) * std::sin(3.0 * x.phi) * std::cos(4.0 * t), 0.0, 0.0};
}

namespace {

// r² sinθ sin(3φ) without going through angles: r·ρ·sin3φ with sinφ = y/ρ.
double r2_sin_theta_sin3phi(const Vec3& x, double& rho, double& r) {
  rho = std::sqrt(x.x() * x.x() + x.y() * x.y());
  r = x.norm();
  if (rho == 0.0) return 0.0;
  const double sp = x.y() / rho;
  return r * rho * (3.0 * sp - 4.0 * sp * sp * sp);
}

}  // namespace

Vec3 RadialGrPerturbation::evaluate(const Vec3& x, double t) const {
  double rho, r;
  const double amp = r2_sin_theta_sin3phi(x, rho, r) * std::cos(4.0 * t);
  if (r == 0.0) return Vec3::Zero();
  return amp * x / r;
}

Vec3 ThetaGrPerturbation::evaluate(const Vec3& x, double t) const {
  double rho, r;
  const double amp = r2_sin_theta_sin3phi(x, rho, r) * std::cos(4.0 * t);
  if (rho == 0.0) return Vec3::Zero();
  const SphericalPoint p = cartesian_to_spherical(x);
  return amp * spherical_frame(p.theta, p.phi).col(1);
}

Vec3 RadialPositivePerturbation::evaluate(const Vec3& x, double) const {
  const double rho = std::hypot(x.x(), x.y());
  const double r = x.norm();
  if (rho == 0.0) return Vec3::Zero();
  const double sp = x.y() / rho;
  const double sin3phi = 3.0 * sp - 4.0 * sp * sp * sp;
  return r * rho * (2.0 + sin3phi) * x / r;
}

SaddleSpectrum classify_saddle(const FieldModel& field, const Vec3& x0, double tol) {
  if (!(tol > 0.0)) throw ConfigError("classify_saddle: tol must be positive");
  const Vec3 f0 = field.evaluate(x0);
  if (!(f0.norm() < tol)) throw DomainError("classify_saddle: point is not a fixed point");

  const Mat3 J = field.jacobian(x0);
  Eigen::EigenSolver<Mat3> solver(J);
  if (solver.info() != Eigen::Success) throw NumericalError("classify_saddle: eigensolver failed");
  const Eigen::Vector3cd values = solver.eigenvalues();
  const Eigen::Matrix3cd vectors = solver.eigenvectors();

  int positive = 0;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(values[i].real()) < tol) throw NonHyperbolicError("classify_saddle: nonhyperbolic fixed point");
    if (values[i].real() > 0.0) ++positive;
  }
  if (positive == 0 || positive == 3) throw NonHyperbolicError("classify_saddle: fixed point is not a saddle");

  SaddleSpectrum s;
  s.location = x0;
  s.kind = positive == 2 ? SaddleCase::TwoDimUnstable : SaddleCase::TwoDimStable;
  const bool isolated_positive = positive == 1;
  int iso = -1;
  std::array<int, 2> pair_idx{};
  int k = 0;
  for (int i = 0; i < 3; ++i) {
    if ((values[i].real() > 0.0) == isolated_positive)
      iso = i;
    else
      pair_idx[k++] = i;
  }
  if (std::abs(values[iso].imag()) > tol) throw NumericalError("classify_saddle: isolated eigenvalue is complex");
  if (values[pair_idx[0]].imag() < values[pair_idx[1]].imag()) std::swap(pair_idx[0], pair_idx[1]);

  s.isolated = values[iso].real();
  s.isolated_vector = vectors.col(iso).normalized();
  for (int j = 0; j < 2; ++j) {
    s.pair[j] = values[pair_idx[j]];
    s.pair_vectors[j] = vectors.col(pair_idx[j]).normalized();
  }
  const Eigen::Vector3cd cross = s.pair_vectors[0].cross(s.pair_vectors[1]);
  if (cross.norm() < 1e-8) throw NonHyperbolicError("classify_saddle: pair eigenvectors are dependent");
  return s;
}

}  // namespace melnikov3d
