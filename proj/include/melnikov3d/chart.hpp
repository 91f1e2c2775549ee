#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "melnikov3d/field_models.hpp"
#include "melnikov3d/integrator.hpp"

namespace melnikov3d {

enum class ChartKind { Unstable, Stable, Heteroclinic };

const char* to_string(ChartKind kind);

struct ChartDomain {
  double p_min = -std::numeric_limits<double>::infinity();
  double p_max = std::numeric_limits<double>::infinity();
  /// +1 when f ∧ x̄_α points to the side the chart builder calls outward.
  int orientation = 1;

  bool contains(double p) const { return p >= p_min && p <= p_max; }
};

/// Everything the Melnikov integrand needs at one chart node.
struct ChartSample {
  Vec3 point = Vec3::Zero();
  Vec3 alpha_partial = Vec3::Zero();
  /// Accumulated ∫∇·f along the trajectory from a fixed, α-dependent origin;
  /// only differences along one trajectory are meaningful.
  double divergence_accumulator = 0.0;
};

/// Parameterization x̄(p, α) of a 2D invariant manifold by trajectories:
/// p runs along a trajectory (∂x̄/∂p = f(x̄)), α ∈ S¹ selects it.
class ManifoldChart {
 public:
  virtual ~ManifoldChart() = default;

  virtual std::string id() const = 0;
  virtual ChartKind kind() const = 0;
  virtual ChartDomain domain() const = 0;
  virtual const FieldModel& field() const = 0;
  virtual ChartSample sample(double p, double alpha) const = 0;

  /// Saddle approached as p → −∞ (unstable and heteroclinic charts).
  virtual const std::optional<SaddleSpectrum>& upstream_saddle() const = 0;
  /// Saddle approached as p → +∞ (stable and heteroclinic charts).
  virtual const std::optional<SaddleSpectrum>& downstream_saddle() const = 0;

  Vec3 point(double p, double alpha) const { return sample(p, alpha).point; }
  Vec3 alpha_partial(double p, double alpha) const { return sample(p, alpha).alpha_partial; }
  Vec3 velocity(double p, double alpha) const { return field().evaluate(point(p, alpha)); }
  /// ∫_τ^p ∇·f(x̄(ξ, α)) dξ.
  double divergence_integral(double tau, double p, double alpha) const;
};

using ChartPtr = std::shared_ptr<const ManifoldChart>;

/// f(x̄(p, α)) ∧ x̄_α(p, α). Throws FoliationError when its length is below 1e-12.
Vec3 chart_normal(const ManifoldChart& chart, double p, double alpha);

/// The unit sphere of Hill's vortex as a heteroclinic chart:
/// x̄(p, α) = (1, arccos(−tanh(3p/2)), 2πα − p/(2R0)) in (r, θ, φ), with the
/// swirl term absent for the classical vortex. p = 0 is the equator.
class HillSphereChart final : public ManifoldChart {
 public:
  /// `swirl_rate` is 1/(2R0); zero for the classical vortex.
  HillSphereChart(std::shared_ptr<const FieldModel> field, double swirl_rate);

  std::string id() const override;
  ChartKind kind() const override { return ChartKind::Heteroclinic; }
  ChartDomain domain() const override { return {}; }
  const FieldModel& field() const override { return *field_; }
  ChartSample sample(double p, double alpha) const override;
  const std::optional<SaddleSpectrum>& upstream_saddle() const override { return north_; }
  const std::optional<SaddleSpectrum>& downstream_saddle() const override { return south_; }

 private:
  std::shared_ptr<const FieldModel> field_;
  double swirl_rate_;
  std::optional<SaddleSpectrum> north_;
  std::optional<SaddleSpectrum> south_;
};

ChartPtr hill_chart_classical();
ChartPtr hill_chart_swirl(double R0);

struct GenericChartOptions {
  /// Unstable: seed around a two-dimensional-unstable saddle and integrate
  /// forward. Stable: seed around a two-dimensional-stable saddle and
  /// integrate backward. Heteroclinic needs `far_saddle`.
  ChartKind kind = ChartKind::Unstable;
  double ring_radius = 1e-3;
  std::size_t n_alpha = 128;
  /// p = 0 where a trajectory first changes the sign of this function.
  /// Without it, p = 0 sits at arc length 1 from the saddle.
  std::function<double(const Vec3&)> section;
  /// How far past p = 0 (away from the seed saddle) each trajectory is kept.
  double p_extent = 6.0;
  double tol = 1e-12;
  double max_time = 400.0;
  /// Direction marking α = 0 (projected into the ring plane).
  std::optional<Vec3> alpha_reference;
  /// α increases counterclockwise about this axis.
  std::optional<Vec3> orientation_reference;
  /// Saddle at the far end for heteroclinic charts; trajectories stop once
  /// within `far_radius` of it and continue by its linearization.
  std::optional<SaddleSpectrum> far_saddle;
  double far_radius = 1e-3;
};

/// Chart built by shooting trajectories from a ring of radius δ in the 2D
/// eigenplane of a saddle. α is interpolated with a periodic cubic spline
/// across the ring's trajectories; beyond the integrated range a
/// trajectory continues along the saddle's linearized flow.
ChartPtr generic_chart_from_saddle(std::shared_ptr<const FieldModel> field, const SaddleSpectrum& spectrum,
                                   const GenericChartOptions& options);

/// Uniform periodic cubic spline in α over n nodes, as weights on node values.
class PeriodicSplineWeights {
 public:
  explicit PeriodicSplineWeights(std::size_t n);

  struct Stencil {
    std::vector<std::size_t> nodes;
    std::vector<double> value;
    std::vector<double> derivative;  ///< d/dα
  };
  Stencil at(double alpha) const;
  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  std::size_t half_width_;
  std::vector<double> cardinal_m_;  // second derivatives of the cardinal spline
};

}  // namespace melnikov3d
