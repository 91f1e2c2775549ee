#pragma once

#include <array>
#include <complex>
#include <map>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "melnikov3d/geometry.hpp"

namespace melnikov3d {

using ModelParams = std::map<std::string, double>;

enum class CoordinateSystem { Cartesian, Spherical };

/// Unperturbed velocity f of ẋ = f(x) + ε g(x, t).
///
/// Positions and velocities cross this interface in Cartesian components;
/// models that are naturally spherical say so through coordinate_system()
/// and additionally expose their spherical components (SphericalFieldModel).
class FieldModel {
 public:
  virtual ~FieldModel() = default;

  virtual std::string name() const = 0;
  virtual ModelParams parameters() const { return {}; }
  virtual Vec3 evaluate(const Vec3& x) const = 0;

  /// Central finite differences with step 1e-6 · max(1, |x|). For piecewise
  /// models every stencil point uses the analytic branch owning x.
  virtual Mat3 jacobian(const Vec3& x) const;
  /// Trace of the Jacobian unless the model knows better.
  virtual double divergence(const Vec3& x) const;

  virtual CoordinateSystem coordinate_system() const { return CoordinateSystem::Cartesian; }
  virtual bool known_volume_preserving() const { return false; }

  /// Piecewise-analytic models: which branch formula owns x.
  virtual int branch_at(const Vec3&) const { return 0; }
  /// Evaluates one branch's formula, also outside the region it owns.
  virtual Vec3 evaluate_branch(const Vec3& x, int /*branch*/) const { return evaluate(x); }
};

/// A field given by (f_r, f_θ, f_φ) components.
class SphericalFieldModel : public FieldModel {
 public:
  Vec3 evaluate(const Vec3& x) const override;
  Vec3 evaluate_branch(const Vec3& x, int branch) const override;
  CoordinateSystem coordinate_system() const override { return CoordinateSystem::Spherical; }

  Vec3 evaluate_spherical(const SphericalPoint& p) const {
    return evaluate_spherical(p, branch_for_radius(p.r));
  }
  virtual Vec3 evaluate_spherical(const SphericalPoint& p, int branch) const = 0;

  int branch_at(const Vec3& x) const override { return branch_for_radius(x.norm()); }

 protected:
  virtual int branch_for_radius(double) const { return 0; }
};

/// Classical Hill's spherical vortex in spherical components. Interior
/// branch for r ≤ 1 (including the sphere), exterior for r > 1.
Vec3 hill_classical_eval(const SphericalPoint& x);
/// Hill's vortex with swirl at Rossby number R0 > 0.
Vec3 hill_swirl_eval(const SphericalPoint& x, double R0);

class HillClassicalField final : public SphericalFieldModel {
 public:
  std::string name() const override { return "hill-classical"; }
  using SphericalFieldModel::evaluate_spherical;
  Vec3 evaluate_spherical(const SphericalPoint& p, int branch) const override;
  Vec3 evaluate_branch(const Vec3& x, int branch) const override;
  double divergence(const Vec3&) const override { return 0.0; }
  bool known_volume_preserving() const override { return true; }

 protected:
  int branch_for_radius(double r) const override { return r <= 1.0 ? 0 : 1; }
};

class HillSwirlField final : public SphericalFieldModel {
 public:
  explicit HillSwirlField(double R0);

  std::string name() const override { return "hill-swirl"; }
  ModelParams parameters() const override { return {{"R0", R0_}}; }
  using SphericalFieldModel::evaluate_spherical;
  Vec3 evaluate_spherical(const SphericalPoint& p, int branch) const override;
  Vec3 evaluate_branch(const Vec3& x, int branch) const override;
  double divergence(const Vec3&) const override { return 0.0; }
  bool known_volume_preserving() const override { return true; }
  double rossby() const { return R0_; }

 protected:
  int branch_for_radius(double r) const override { return r <= 1.0 ? 0 : 1; }

 private:
  double R0_;
};

/// Linear saddle ẋ = [[l, −ω, 0], [ω, l, 0], [0, 0, s]] x. With l > 0 > s
/// the origin has a 2D unstable manifold (the plane z = 0), spiralling when
/// ω ≠ 0; divergence is 2l + s.
class LinearSaddleField final : public FieldModel {
 public:
  LinearSaddleField(double plane_rate, double rotation, double normal_rate);

  std::string name() const override { return "linear-saddle"; }
  ModelParams parameters() const override;
  Vec3 evaluate(const Vec3& x) const override { return matrix_ * x; }
  Mat3 jacobian(const Vec3&) const override { return matrix_; }
  double divergence(const Vec3&) const override { return matrix_.trace(); }
  bool known_volume_preserving() const override { return matrix_.trace() == 0.0; }

 private:
  Mat3 matrix_;
};

/// Perturbation g(x, t), Cartesian in and out.
class PerturbationModel {
 public:
  virtual ~PerturbationModel() = default;
  virtual std::string name() const = 0;
  virtual ModelParams parameters() const { return {}; }
  virtual Vec3 evaluate(const Vec3& x, double t) const = 0;
  virtual std::optional<double> bounded_hint() const { return std::nullopt; }
};

class ZeroPerturbation final : public PerturbationModel {
 public:
  std::string name() const override { return "none"; }
  Vec3 evaluate(const Vec3&, double) const override { return Vec3::Zero(); }
  std::optional<double> bounded_hint() const override { return 0.0; }
};

/// g = r² sinθ sin(3φ) cos(4t) r̂, returned in spherical components.
Vec3 perturbation_gr_eval(const SphericalPoint& x, double t);

/// The radial perturbation above.
class RadialGrPerturbation final : public PerturbationModel {
 public:
  std::string name() const override { return "gr"; }
  Vec3 evaluate(const Vec3& x, double t) const override;
};

/// Same profile as gr but along θ̂; tangent to every sphere.
class ThetaGrPerturbation final : public PerturbationModel {
 public:
  std::string name() const override { return "gtheta"; }
  Vec3 evaluate(const Vec3& x, double t) const override;
};

/// Steady g = r² sinθ (2 + sin 3φ) r̂: strictly outward off the axis.
class RadialPositivePerturbation final : public PerturbationModel {
 public:
  std::string name() const override { return "gr-positive"; }
  Vec3 evaluate(const Vec3& x, double t) const override;
};

/// g = cos(κ t) ẑ.
class UniformZPerturbation final : public PerturbationModel {
 public:
  explicit UniformZPerturbation(double kappa) : kappa_(kappa) {}
  std::string name() const override { return "uniform-z"; }
  ModelParams parameters() const override { return {{"kappa", kappa_}}; }
  Vec3 evaluate(const Vec3&, double t) const override { return {0.0, 0.0, std::cos(kappa_ * t)}; }
  std::optional<double> bounded_hint() const override { return 1.0; }

 private:
  double kappa_;
};

enum class SaddleCase {
  TwoDimUnstable,  ///< one negative eigenvalue, pair with positive real parts
  TwoDimStable,    ///< one positive eigenvalue, pair with negative real parts
};

/// Eigen-structure of Df at a hyperbolic saddle. The isolated eigenvalue is
/// the one whose sign differs from the pair's real parts (λˢ in the
/// unstable case); the pair spans the tangent plane of the 2D manifold.
struct SaddleSpectrum {
  Vec3 location = Vec3::Zero();
  SaddleCase kind = SaddleCase::TwoDimUnstable;
  double isolated = 0.0;
  std::array<std::complex<double>, 2> pair{};
  Eigen::Vector3cd isolated_vector = Eigen::Vector3cd::Zero();
  std::array<Eigen::Vector3cd, 2> pair_vectors{};

  double pair_real_part() const { return pair[0].real(); }
  double trace() const { return isolated + pair[0].real() + pair[1].real(); }
  bool spiral() const { return pair[0].imag() != 0.0; }
};

/// Eigendecomposition of the Jacobian at a fixed point, sorted into the two
/// saddle cases. Throws DomainError if |f(x0)| ≥ tol, NonHyperbolicError if
/// some |Re λ| < tol or the spectrum is not of saddle type.
SaddleSpectrum classify_saddle(const FieldModel& field, const Vec3& x0, double tol = 1e-8);

}  // namespace melnikov3d
