#include "melnikov3d/melnikov.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace melnikov3d {

void QuadratureSpec::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ConfigError("quadrature tolerances must be positive");
  if (truncation == TruncationPolicy::Fixed && !(fixed_cut > 0.0)) throw ConfigError("fixed cut must be positive");
  if (max_subdivisions == 0) throw ConfigError("max_subdivisions must be positive");
}

const char* to_string(MelnikovKind kind) {
  switch (kind) {
    case MelnikovKind::Unstable:
      return "unstable";
    case MelnikovKind::Stable:
      return "stable";
    case MelnikovKind::Heteroclinic:
      return "heteroclinic";
  }
  return "unknown";
}

namespace {

class WeightedIntegrand {
 public:
  WeightedIntegrand(const ManifoldChart& chart, const PerturbationModel& g, double p, double alpha, double t, bool weight)
      : chart_(chart), g_(g), p_(p), alpha_(alpha), t_(t) {
    weighted_ = weight && !chart.field().known_volume_preserving();
    if (weighted_) d_at_p_ = chart.sample(p, alpha).divergence_accumulator;
  }

  double operator()(double tau) const {
    const ChartSample s = chart_.sample(tau, alpha_);
    const Vec3 n = wedge(chart_.field().evaluate(s.point), s.alpha_partial);
    double value = n.dot(g_.evaluate(s.point, tau + t_ - p_));
    if (weighted_) value *= std::exp(d_at_p_ - s.divergence_accumulator);
    return value;
  }

 private:
  const ManifoldChart& chart_;
  const PerturbationModel& g_;
  double p_, alpha_, t_;
  bool weighted_ = false;
  double d_at_p_ = 0.0;
};

double window_envelope(const WeightedIntegrand& F, double p, double dir, double s0, double s1) {
  double env = 0.0;
  for (int k = 0; k <= 8; ++k) {
    const double s = s0 + (s1 - s0) * k / 8.0;
    env = std::max(env, std::abs(F(p + dir * s)));
  }
  return env;
}

// Offset |τ − p| at which the tail is dropped.
double tail_offset(const WeightedIntegrand& F, const ManifoldChart& chart, double p, double dir, const QuadratureSpec& q,
                   const std::optional<SaddleSpectrum>& saddle) {
  const ChartDomain dom = chart.domain();
  const double room = dir < 0 ? p - dom.p_min : dom.p_max - p;
  if (q.truncation == TruncationPolicy::Fixed) {
    if (q.fixed_cut > room) throw DomainError("Melnikov: fixed truncation leaves the chart domain");
    return q.fixed_cut;
  }
  const double rate = saddle ? std::abs(saddle->isolated) : 1.0;
  const double cap = std::min(60.0 / rate, room);
  double first_env = -1.0;
  for (double s = 0.0;; s += 1.0) {
    const double s1 = std::min(s + 1.0, cap);
    const double env = window_envelope(F, p, dir, s, s1);
    if (first_env < 0.0) first_env = env;
    if (env < q.abs_tol) return s1;
    if (s1 >= cap) {
      if (env <= 1e-6 * first_env) return s1;
      throw QuadratureError("Melnikov: integrand does not decay at the truncation radius");
    }
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

}  // namespace

double melnikov_integrand(const ManifoldChart& chart, const PerturbationModel& g, double p, double alpha, double t,
                          double tau, bool divergence_weight) {
  return WeightedIntegrand(chart, g, p, alpha, t, divergence_weight)(tau);
}

MelnikovValue melnikov(MelnikovKind kind, const ManifoldChart& chart, const PerturbationModel& g, double p,
                       double alpha, double t, const QuadratureSpec& quad) {
  quad.validate();
  if (!std::isfinite(p) || !std::isfinite(alpha) || !std::isfinite(t)) throw DomainError("Melnikov: non-finite input");
  require(chart.domain().contains(p), "Melnikov: p outside the chart domain");
  const ChartKind ck = chart.kind();
  switch (kind) {
    case MelnikovKind::Unstable:
      require(ck != ChartKind::Stable, "unstable Melnikov function needs an unstable or heteroclinic chart");
      break;
    case MelnikovKind::Stable:
      require(ck != ChartKind::Unstable, "stable Melnikov function needs a stable or heteroclinic chart");
      break;
    case MelnikovKind::Heteroclinic:
      require(ck == ChartKind::Heteroclinic, "heteroclinic Melnikov function needs a heteroclinic chart");
      break;
  }
  const WeightedIntegrand F(chart, g, p, alpha, t, quad.divergence_weight);
  MelnikovValue out;
  out.lower = p;
  out.upper = p;
  if (kind != MelnikovKind::Stable) out.lower = p - tail_offset(F, chart, p, -1.0, quad, chart.upstream_saddle());
  if (kind != MelnikovKind::Unstable) out.upper = p + tail_offset(F, chart, p, 1.0, quad, chart.downstream_saddle());
  const QuadratureResult r =
      integrate(quad.rule, std::cref(F), out.lower, out.upper, quad.abs_tol, quad.rel_tol, quad.max_subdivisions);
  out.value = kind == MelnikovKind::Stable ? -r.value : r.value;
  out.error = r.error;
  return out;
}

MelnikovValue melnikov_unstable(const ManifoldChart& chart, const PerturbationModel& g, double p, double alpha,
                                double t, const QuadratureSpec& quad) {
  return melnikov(MelnikovKind::Unstable, chart, g, p, alpha, t, quad);
}

MelnikovValue melnikov_stable(const ManifoldChart& chart, const PerturbationModel& g, double p, double alpha,
                              double t, const QuadratureSpec& quad) {
  return melnikov(MelnikovKind::Stable, chart, g, p, alpha, t, quad);
}

MelnikovValue melnikov_heteroclinic(const ManifoldChart& chart, const PerturbationModel& g, double p, double alpha,
                                    double t, const QuadratureSpec& quad) {
  return melnikov(MelnikovKind::Heteroclinic, chart, g, p, alpha, t, quad);
}

double displacement(const ManifoldChart& chart, double M, double p, double alpha, double eps) {
  return eps * M / chart_normal(chart, p, alpha).norm();
}

Vec3 perturbed_surface_point(const ManifoldChart& chart, MelnikovKind kind, const PerturbationModel& g, double p,
                             double alpha, double t, double eps, const QuadratureSpec& quad) {
  if (kind == MelnikovKind::Heteroclinic) throw ConfigError("surface approximation is for the unstable or stable kind");
  const Vec3 x = chart.point(p, alpha);
  if (eps == 0.0) return x;
  const Vec3 n = chart_normal(chart, p, alpha);
  const double M = melnikov(kind, chart, g, p, alpha, t, quad).value;
  return x + eps * M * n / n.squaredNorm();
}

DecayFit fit_lower_tail_decay(const ManifoldChart& chart, const PerturbationModel& g, double p, double alpha,
                              double t, double start, double stop, double window) {
  if (!(window > 0.0) || !(stop > start)) throw ConfigError("decay fit: bad window");
  const WeightedIntegrand F(chart, g, p, alpha, t, true);
  DecayFit fit;
  for (double s = start; s + window <= stop + 1e-12; s += window) {
    const double env = window_envelope(F, p, -1.0, s, s + window);
    if (!(env > 1e-280)) continue;
    fit.offsets.push_back(s + 0.5 * window);
    fit.envelopes.push_back(env);
  }
  const std::size_t n = fit.offsets.size();
  if (n < 3) throw NumericalError("decay fit: too few nonzero windows");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = fit.offsets[i], y = std::log(fit.envelopes[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double dn = static_cast<double>(n);
  fit.rate = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
  fit.log_constant = (sy - fit.rate * sx) / dn;
  return fit;
}

double MelnikovField::at(std::size_t i, std::ptrdiff_t j) const {
  const auto n = static_cast<std::ptrdiff_t>(alpha.size());
  j %= n;
  if (j < 0) j += n;
  return values(static_cast<Eigen::Index>(i), j);
}

unsigned resolve_thread_count(int requested) {
  if (requested > 0) return static_cast<unsigned>(requested);
  if (const char* env = std::getenv("MELNIKOV3D_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    throw ConfigError("MELNIKOV3D_THREADS must be a positive integer");
  }
  return 1;
}

void update_gradients(MelnikovField& f) {
  const auto np = static_cast<Eigen::Index>(f.n_p());
  const auto na = static_cast<Eigen::Index>(f.n_alpha());
  f.dMdp.setZero(np, na);
  f.dMdalpha.setZero(np, na);
  for (Eigen::Index i = 0; i < np; ++i) {
    for (Eigen::Index j = 0; j < na; ++j) {
      if (i == 0)
        f.dMdp(i, j) = (f.values(1, j) - f.values(0, j)) / (f.p[1] - f.p[0]);
      else if (i == np - 1)
        f.dMdp(i, j) = (f.values(i, j) - f.values(i - 1, j)) / (f.p[i] - f.p[i - 1]);
      else
        f.dMdp(i, j) = (f.values(i + 1, j) - f.values(i - 1, j)) / (f.p[i + 1] - f.p[i - 1]);
      f.dMdalpha(i, j) = (f.at(i, j + 1) - f.at(i, j - 1)) / (2.0 * f.dalpha());
    }
  }
}

MelnikovField build_melnikov_grid(const ManifoldChart& chart, const PerturbationModel& g, double t, double p_min,
                                  double p_max, std::size_t n_p, std::size_t n_alpha, const QuadratureSpec& quad,
                                  MelnikovKind kind, unsigned threads) {
  if (n_p < 8 || n_alpha < 8) throw ConfigError("Melnikov grid needs at least 8 points in p and in alpha");
  if (!(p_max > p_min)) throw ConfigError("Melnikov grid needs p_max > p_min");
  if (!chart.domain().contains(p_min) || !chart.domain().contains(p_max))
    throw DomainError("Melnikov grid: p range outside the chart domain");
  quad.validate();

  MelnikovField F;
  F.t = t;
  F.kind = kind;
  F.chart_id = chart.id();
  F.perturbation_id = g.name();
  F.spec = quad;
  F.p.resize(n_p);
  for (std::size_t i = 0; i < n_p; ++i)
    F.p[i] = p_min + (p_max - p_min) * static_cast<double>(i) / static_cast<double>(n_p - 1);
  F.alpha.resize(n_alpha);
  for (std::size_t j = 0; j < n_alpha; ++j) F.alpha[j] = static_cast<double>(j) / static_cast<double>(n_alpha);
  F.values.setZero(static_cast<Eigen::Index>(n_p), static_cast<Eigen::Index>(n_alpha));
  F.error.setZero(static_cast<Eigen::Index>(n_p), static_cast<Eigen::Index>(n_alpha));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n_p; i = next++) {
      try {
        for (std::size_t j = 0; j < n_alpha; ++j) {
          const MelnikovValue v = melnikov(kind, chart, g, F.p[i], F.alpha[j], t, quad);
          F.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v.value;
          F.error(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v.error;
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n_p;
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_p)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  update_gradients(F);
  return F;
}

}  // namespace melnikov3d
