#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "melnikov3d/chart.hpp"
#include "melnikov3d/quadrature.hpp"

namespace melnikov3d {

enum class TruncationPolicy { Adaptive, Fixed };

struct QuadratureSpec {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  TruncationPolicy truncation = TruncationPolicy::Adaptive;
  /// |τ − p| cut for the fixed policy.
  double fixed_cut = 30.0;
  QuadratureRule rule = QuadratureRule::AdaptiveSimpson;
  std::size_t max_subdivisions = 200000;
  /// Diagnostic switch: false drops the exp(∫∇·f) weight.
  bool divergence_weight = true;

  void validate() const;
};

enum class MelnikovKind { Unstable, Stable, Heteroclinic };
const char* to_string(MelnikovKind kind);

struct MelnikovValue {
  double value = 0.0;
  double error = 0.0;
  /// Truncated integration limits actually used.
  double lower = 0.0;
  double upper = 0.0;
};

/// exp[∫_τ^p ∇·f] (f ∧ x̄_α)(τ, α) · g(x̄(τ, α), τ + t − p).
double melnikov_integrand(const ManifoldChart& chart, const PerturbationModel& g, double p, double alpha, double t,
                          double tau, bool divergence_weight = true);

/// ∫_{−∞}^p of the integrand. Needs an unstable or heteroclinic chart.
MelnikovValue melnikov_unstable(const ManifoldChart& chart, const PerturbationModel& g, double p, double alpha,
                                double t, const QuadratureSpec& quad = {});
/// −∫_p^∞ of the integrand. Needs a stable or heteroclinic chart.
MelnikovValue melnikov_stable(const ManifoldChart& chart, const PerturbationModel& g, double p, double alpha,
                              double t, const QuadratureSpec& quad = {});
/// ∫_{−∞}^{∞} of the integrand. Needs a heteroclinic chart.
MelnikovValue melnikov_heteroclinic(const ManifoldChart& chart, const PerturbationModel& g, double p, double alpha,
                                    double t, const QuadratureSpec& quad = {});
MelnikovValue melnikov(MelnikovKind kind, const ManifoldChart& chart, const PerturbationModel& g, double p,
                       double alpha, double t, const QuadratureSpec& quad = {});

/// Leading-order normal displacement ε M / |f ∧ x̄_α|.
double displacement(const ManifoldChart& chart, double M, double p, double alpha, double eps);

/// x̄(p, α) + ε M (f ∧ x̄_α) / |f ∧ x̄_α|², with M the unstable or stable function.
Vec3 perturbed_surface_point(const ManifoldChart& chart, MelnikovKind kind, const PerturbationModel& g, double p,
                             double alpha, double t, double eps, const QuadratureSpec& quad = {});

struct DecayFit {
  double rate = 0.0;  ///< slope of log envelope against |τ − p|; negative when decaying
  double log_constant = 0.0;
  std::vector<double> offsets;
  std::vector<double> envelopes;
};

/// Fits log max|integrand| over windows of width `window` at offsets
/// |τ − p| ∈ [start, stop] on the lower (unstable) tail.
DecayFit fit_lower_tail_decay(const ManifoldChart& chart, const PerturbationModel& g, double p, double alpha,
                              double t, double start, double stop, double window = 0.5);

/// M sampled at fixed t on a p × α grid; α_j = j / n_alpha.
struct MelnikovField {
  double t = 0.0;
  MelnikovKind kind = MelnikovKind::Heteroclinic;
  std::vector<double> p;
  std::vector<double> alpha;
  Eigen::MatrixXd values;  ///< values(i, j) = M(p_i, α_j)
  Eigen::MatrixXd dMdp;
  Eigen::MatrixXd dMdalpha;
  Eigen::MatrixXd error;
  std::string chart_id;
  std::string perturbation_id;
  QuadratureSpec spec;

  std::size_t n_p() const { return p.size(); }
  std::size_t n_alpha() const { return alpha.size(); }
  double dp() const { return p.size() > 1 ? p[1] - p[0] : 0.0; }
  double dalpha() const { return 1.0 / static_cast<double>(alpha.size()); }
  /// Value with α-periodic column wrap.
  double at(std::size_t i, std::ptrdiff_t j) const;
};

/// Worker count: explicit value if positive, else MELNIKOV3D_THREADS, else 1.
unsigned resolve_thread_count(int requested);

/// Fills a grid with n_p ≥ 8 points spanning [p_min, p_max] and n_alpha ≥ 8
/// periodic α nodes; gradients by central differences (one-sided at the p edges).
MelnikovField build_melnikov_grid(const ManifoldChart& chart, const PerturbationModel& g, double t, double p_min,
                                  double p_max, std::size_t n_p, std::size_t n_alpha, const QuadratureSpec& quad = {},
                                  MelnikovKind kind = MelnikovKind::Heteroclinic, unsigned threads = 1);

/// Recomputes the gradient arrays from `values`.
void update_gradients(MelnikovField& field);

}  // namespace melnikov3d
