#include "melnikov3d/verification.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "melnikov3d/integrator.hpp"

namespace melnikov3d {

namespace {

// Normal offset of the endpoint of a perturbed run seeded on the chart.
double offset(const ManifoldChart& chart, const PerturbationModel& g, double eps, double p, double alpha, double t,
              double p_launch, const Vec3& unit_normal, const Vec3& target, double tol) {
  const Vec3 seed = chart.point(p_launch, alpha);
  const double t0 = t - (p - p_launch);
  IntegratorOptions opt;
  opt.tol = tol;
  opt.max_step = 0.1;
  const Trajectory tr = DormandPrince45(chart.field(), &g, eps, opt).run(seed, t0, t);
  return (tr.back().x - target).dot(unit_normal);
}

double pair_rate(const std::optional<SaddleSpectrum>& s) {
  if (!s) throw DomainError("oracle: chart has no saddle at this end");
  return std::abs(s->pair_real_part());
}

}  // namespace

DisplacementSample measure_displacement(const ManifoldChart& chart, const PerturbationModel& g, double eps, double p,
                                        double alpha, double t, double p_launch, MelnikovKind kind,
                                        const OracleOptions& opt) {
  if (!std::isfinite(eps) || !std::isfinite(p) || !std::isfinite(alpha) || !std::isfinite(t) ||
      !std::isfinite(p_launch))
    throw DomainError("oracle: non-finite input");
  DisplacementSample s;
  s.kind = kind;
  s.p = p;
  s.alpha = alpha;
  s.t = t;
  s.eps = eps;
  s.p_launch = p_launch;

  const Vec3 target = chart.point(p, alpha);
  const Vec3 n = chart_normal(chart, p, alpha);
  const Vec3 unit = n.normalized();

  const bool need_u = kind != MelnikovKind::Stable;
  const bool need_s = kind != MelnikovKind::Unstable;
  const double ps_launch = kind == MelnikovKind::Stable ? p_launch : 2.0 * p - p_launch;
  if (need_u && p_launch > p - 5.0 / pair_rate(chart.upstream_saddle()))
    throw DomainError("oracle: unstable launch is not deep enough in the linear regime");
  if (need_s && ps_launch < p + 5.0 / pair_rate(chart.downstream_saddle()))
    throw DomainError("oracle: stable launch is not deep enough in the linear regime");

  // Offsets at the launch and one and two units deeper.
  std::array<double, 3> d{};
  for (int k = 0; k < 3; ++k) {
    if (need_u) d[k] += offset(chart, g, eps, p, alpha, t, p_launch - k, unit, target, opt.tol);
    // Alone the stable offset is the measurement; in the split it is subtracted.
    if (need_s) d[k] += (need_u ? -1.0 : 1.0) * offset(chart, g, eps, p, alpha, t, ps_launch + k, unit, target, opt.tol);
  }
  s.measured_d = d[0];
  const double e1 = std::abs(d[0] - d[1]), e2 = std::abs(d[1] - d[2]);
  s.seeding_error_estimate = e2 < e1 ? e1 / (1.0 - e2 / e1) : e1 + e2;
  s.melnikov = melnikov(kind, chart, g, p, alpha, t, opt.quad).value;
  s.predicted_d = eps * s.melnikov / n.norm();
  return s;
}

OrderFit fit_order(const std::vector<double>& eps, const std::vector<double>& errors, double noise_floor) {
  if (eps.size() != errors.size()) throw ConfigError("fit_order: size mismatch");
  if (eps.size() < 3) throw ConfigError("fit_order: need at least three eps values");
  std::set<double> distinct;
  for (double e : eps) {
    if (!(e > 0.0) || !std::isfinite(e)) throw ConfigError("fit_order: eps must be positive");
    distinct.insert(e);
  }
  if (distinct.size() != eps.size()) throw ConfigError("fit_order: eps values must be distinct");
  if (*distinct.rbegin() < 10.0 * *distinct.begin()) throw ConfigError("fit_order: eps must span a decade");

  OrderFit fit;
  fit.eps = eps;
  fit.errors = errors;
  for (double e : errors)
    if (!(e > noise_floor)) fit.saturated = true;
  if (fit.saturated) return fit;

  const double n = static_cast<double>(eps.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double x = std::log(eps[i]), y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double cxx = sxx - sx * sx / n, cxy = sxy - sx * sy / n, cyy = syy - sy * sy / n;
  fit.slope = cxy / cxx;
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.r2 = cyy > 0.0 ? cxy * cxy / (cxx * cyy) : 1.0;
  return fit;
}

OrderFit fit_order(const std::vector<DisplacementSample>& samples, double noise_floor) {
  std::vector<double> eps, err;
  for (const auto& s : samples) {
    eps.push_back(s.eps);
    err.push_back(s.error());
  }
  return fit_order(eps, err, noise_floor);
}

}  // namespace melnikov3d
