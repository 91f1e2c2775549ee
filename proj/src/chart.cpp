#include "melnikov3d/chart.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Dense>

namespace melnikov3d {

const char* to_string(ChartKind kind) {
  switch (kind) {
    case ChartKind::Unstable:
      return "unstable";
    case ChartKind::Stable:
      return "stable";
    case ChartKind::Heteroclinic:
      return "heteroclinic";
  }
  return "unknown";
}

double ManifoldChart::divergence_integral(double tau, double p, double alpha) const {
  if (field().known_volume_preserving()) return 0.0;
  return sample(p, alpha).divergence_accumulator - sample(tau, alpha).divergence_accumulator;
}

Vec3 chart_normal(const ManifoldChart& chart, double p, double alpha) {
  const ChartSample s = chart.sample(p, alpha);
  const Vec3 n = wedge(chart.field().evaluate(s.point), s.alpha_partial);
  if (!(n.norm() >= 1e-12)) throw FoliationError("chart normal f ^ x_alpha is degenerate");
  return n;
}

// ---------------------------------------------------------------------------
// Hill's sphere

HillSphereChart::HillSphereChart(std::shared_ptr<const FieldModel> field, double swirl_rate)
    : field_(std::move(field)), swirl_rate_(swirl_rate) {
  north_ = classify_saddle(*field_, Vec3(0.0, 0.0, 1.0));
  south_ = classify_saddle(*field_, Vec3(0.0, 0.0, -1.0));
}

std::string HillSphereChart::id() const {
  std::string s = "hill-sphere:" + field_->name();
  for (const auto& [k, v] : field_->parameters()) s += ":" + k + "=" + std::to_string(v);
  return s;
}

ChartSample HillSphereChart::sample(double p, double alpha) const {
  if (!std::isfinite(p) || !std::isfinite(alpha)) throw DomainError("chart sample: non-finite (p, alpha)");
  // sinθ = sech(3p/2), cosθ = −tanh(3p/2), both from e = exp(−3|p|/2).
  const double e = std::exp(-1.5 * std::abs(p));
  const double inv = 1.0 / (1.0 + e * e);
  const double st = 2.0 * e * inv;
  const double ct = (p >= 0.0 ? -1.0 : 1.0) * (1.0 - e * e) * inv;
  const double phi = kTwoPi * (alpha - std::floor(alpha)) - swirl_rate_ * p;
  const double cp = std::cos(phi), sp = std::sin(phi);
  ChartSample out;
  out.point << st * cp, st * sp, ct;
  out.alpha_partial << -kTwoPi * st * sp, kTwoPi * st * cp, 0.0;
  return out;
}

ChartPtr hill_chart_classical() {
  return std::make_shared<HillSphereChart>(std::make_shared<HillClassicalField>(), 0.0);
}

ChartPtr hill_chart_swirl(double R0) {
  return std::make_shared<HillSphereChart>(std::make_shared<HillSwirlField>(R0), 0.5 / R0);
}

// ---------------------------------------------------------------------------
// Periodic cubic spline

PeriodicSplineWeights::PeriodicSplineWeights(std::size_t n) : n_(n) {
  if (n < 4) throw ConfigError("periodic spline needs at least 4 nodes");
  half_width_ = std::min<std::size_t>(n / 2, 24);
  // Inverse of the circulant (1, 4, 1): c_k = r^|k| / (2√3), r = √3 − 2,
  // summed over periodic images.
  const double r = std::sqrt(3.0) - 2.0;
  std::vector<double> c(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (int m = -8; m <= 8; ++m) {
      const double j = std::abs(static_cast<double>(k) + static_cast<double>(m) * static_cast<double>(n));
      if (j > 80.0) continue;
      acc += std::pow(r, j);
    }
    c[k] = acc / (2.0 * std::sqrt(3.0));
  }
  const double h = 1.0 / static_cast<double>(n);
  cardinal_m_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    // Cardinal data δ_{k0}; second differences hit k = −1, 0, 1.
    const double cm = c[(j + n - 1) % n], c0 = c[j], cp = c[(j + 1) % n];
    cardinal_m_[j] = 6.0 / (h * h) * (cm - 2.0 * c0 + cp);
  }
}

PeriodicSplineWeights::Stencil PeriodicSplineWeights::at(double alpha) const {
  const double n = static_cast<double>(n_);
  const double h = 1.0 / n;
  double a = alpha - std::floor(alpha);
  double pos = a * n;
  auto i = static_cast<std::size_t>(std::floor(pos));
  if (i >= n_) i = n_ - 1;
  const double u = pos - static_cast<double>(i);
  const double v = 1.0 - u;
  const double am = h * h / 6.0 * (v * v * v - v), bm = h * h / 6.0 * (u * u * u - u);
  const double ad = h / 6.0 * (1.0 - 3.0 * v * v), bd = h / 6.0 * (3.0 * u * u - 1.0);

  Stencil st;
  const auto add = [&](std::size_t k) {
    // Offsets of node k relative to i and i+1, modulo n.
    const std::size_t di = (i + n_ - k) % n_;
    const std::size_t di1 = (i + 1 + n_ - k) % n_;
    double w = am * cardinal_m_[di] + bm * cardinal_m_[di1];
    double dw = ad * cardinal_m_[di] + bd * cardinal_m_[di1];
    if (k == i) {
      w += v;
      dw -= n;
    }
    if (k == (i + 1) % n_) {
      w += u;
      dw += n;
    }
    st.nodes.push_back(k);
    st.value.push_back(w);
    st.derivative.push_back(dw);
  };
  if (2 * half_width_ + 2 >= n_) {
    for (std::size_t k = 0; k < n_; ++k) add(k);
  } else {
    for (std::size_t off = 0; off < 2 * half_width_ + 2; ++off) add((i + n_ - half_width_ + off) % n_);
  }
  return st;
}

// ---------------------------------------------------------------------------
// Shooting chart

namespace {

struct LinearFlow {
  Vec3 origin;
  Eigen::Matrix3cd V;
  Eigen::Matrix3cd Vinv;
  Eigen::Vector3cd lambda;
  Eigen::Vector3d keep;  // 1 for the manifold's pair modes
  double trace = 0.0;

  explicit LinearFlow(const SaddleSpectrum& s) : origin(s.location) {
    V.col(0) = s.isolated_vector;
    V.col(1) = s.pair_vectors[0];
    V.col(2) = s.pair_vectors[1];
    Vinv = V.inverse();
    lambda << s.isolated, s.pair[0], s.pair[1];
    keep << 0.0, 1.0, 1.0;
    trace = s.trace();
  }

  Vec3 advance(const Vec3& x, double dt) const {
    const Eigen::Vector3cd c = Vinv * (x - origin).cast<std::complex<double>>();
    Eigen::Vector3cd e;
    for (int i = 0; i < 3; ++i) e[i] = keep[i] * std::exp(lambda[i] * dt) * c[i];
    return origin + (V * e).real();
  }
};

struct Node {
  Trajectory traj;
  double t_cross = 0.0;  // integration time at p = 0
  double p_seed = 0.0;   // p at the ring
  double p_far = 0.0;    // p where integration stopped
};

class ShootingChart final : public ManifoldChart {
 public:
  ShootingChart(std::shared_ptr<const FieldModel> field, const SaddleSpectrum& seed, const GenericChartOptions& opt);

  std::string id() const override { return "generic:" + field_->name() + ":" + to_string(kind_); }
  ChartKind kind() const override { return kind_; }
  ChartDomain domain() const override { return domain_; }
  const FieldModel& field() const override { return *field_; }
  ChartSample sample(double p, double alpha) const override;
  const std::optional<SaddleSpectrum>& upstream_saddle() const override { return upstream_; }
  const std::optional<SaddleSpectrum>& downstream_saddle() const override { return downstream_; }

 private:
  void node_state(std::size_t k, double p, Vec3& x, double& d) const;
  void check_foliation() const;

  std::shared_ptr<const FieldModel> field_;
  ChartKind kind_;
  double sigma_;  // integration direction away from the seed saddle
  ChartDomain domain_;
  std::optional<SaddleSpectrum> upstream_, downstream_;
  LinearFlow seed_flow_;
  std::optional<LinearFlow> far_flow_;
  std::vector<Node> nodes_;
  PeriodicSplineWeights spline_;
};

double bisect(const std::function<double(double)>& g, double a, double b) {
  double ga = g(a);
  for (int it = 0; it < 200 && std::abs(b - a) > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
    const double m = 0.5 * (a + b);
    const double gm = g(m);
    if ((gm < 0.0) == (ga < 0.0)) {
      a = m;
      ga = gm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

ShootingChart::ShootingChart(std::shared_ptr<const FieldModel> field, const SaddleSpectrum& seed,
                             const GenericChartOptions& opt)
    : field_(std::move(field)), kind_(opt.kind), seed_flow_(seed), spline_(opt.n_alpha) {
  if (!(opt.ring_radius > 0.0)) throw ConfigError("ring radius must be positive");
  if (!(opt.p_extent > 0.0)) throw ConfigError("p extent must be positive");
  const bool need_unstable = kind_ != ChartKind::Stable;
  if (need_unstable && seed.kind != SaddleCase::TwoDimUnstable)
    throw DomainError("unstable chart needs a saddle with a two-dimensional unstable manifold");
  if (!need_unstable && seed.kind != SaddleCase::TwoDimStable)
    throw DomainError("stable chart needs a saddle with a two-dimensional stable manifold");
  if (kind_ == ChartKind::Heteroclinic) {
    if (!opt.far_saddle) throw ConfigError("heteroclinic chart needs a far saddle");
    if (opt.far_saddle->kind != SaddleCase::TwoDimStable)
      throw DomainError("far saddle must have a two-dimensional stable manifold");
    far_flow_.emplace(*opt.far_saddle);
  }
  sigma_ = kind_ == ChartKind::Stable ? -1.0 : 1.0;
  if (kind_ == ChartKind::Stable) {
    downstream_ = seed;
  } else {
    upstream_ = seed;
    if (far_flow_) downstream_ = opt.far_saddle;
  }

  // Ring in eigen-coordinates: x = a + Re(z v1) for complex pairs, c1 v1 + c2 v2
  // for real ones. Circles there are crossed once by every trajectory.
  Vec3 ea, eb;
  if (seed.spiral()) {
    ea = seed.pair_vectors[0].real();
    eb = -seed.pair_vectors[0].imag();
  } else {
    auto realify = [](const Eigen::Vector3cd& v) {
      Eigen::Index idx;
      v.cwiseAbs().maxCoeff(&idx);
      const std::complex<double> phase = std::conj(v[idx]) / std::abs(v[idx]);
      return Vec3((v * phase).real().normalized());
    };
    ea = realify(seed.pair_vectors[0]);
    eb = realify(seed.pair_vectors[1]);
  }
  // Prefer a round ring; keep the eigen-coordinate ellipse when a strongly
  // non-normal linearization would let trajectories cross the circle twice.
  {
    const Vec3 u1 = ea.normalized();
    const Vec3 u2 = (eb - eb.dot(u1) * u1).normalized();
    const Mat3 J = (seed_flow_.V * seed_flow_.lambda.asDiagonal() * seed_flow_.Vinv).real();
    const double sgn = seed.kind == SaddleCase::TwoDimUnstable ? 1.0 : -1.0;
    bool round_ok = true;
    for (int k = 0; k < 64; ++k) {
      const double a = kTwoPi * k / 64.0;
      const Vec3 d = std::cos(a) * u1 + std::sin(a) * u2;
      if (sgn * d.dot(J * d) <= 0.0) round_ok = false;
    }
    if (round_ok) {
      ea = u1;
      eb = u2;
    }
  }
  const Vec3 plane_normal = ea.cross(eb);
  if (opt.orientation_reference && plane_normal.dot(*opt.orientation_reference) < 0.0) eb = -eb;
  double angle0 = 0.0;
  if (opt.alpha_reference) {
    Eigen::Matrix<double, 3, 2> B;
    B << ea, eb;
    const Eigen::Vector2d c = B.colPivHouseholderQr().solve(*opt.alpha_reference);
    if (c.norm() < 1e-12) throw ConfigError("alpha reference is normal to the ring plane");
    angle0 = std::atan2(c[1], c[0]);
  }
  domain_.orientation = 1;

  IntegratorOptions iopt;
  iopt.tol = opt.tol;
  iopt.max_step = 0.25;
  const DormandPrince45 solver(*field_, nullptr, 0.0, iopt);
  const std::size_t n = opt.n_alpha;
  nodes_.resize(n);
  double p_far_limit = sigma_ > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();

  for (std::size_t k = 0; k < n; ++k) {
    const double ang = angle0 + kTwoPi * static_cast<double>(k) / static_cast<double>(n);
    const Vec3 x0 = seed.location + opt.ring_radius * (std::cos(ang) * ea + std::sin(ang) * eb);
    const double ring_dist = (x0 - seed.location).norm();
    const double s0 = opt.section ? opt.section(x0) : 0.0;
    if (opt.section && s0 == 0.0) throw DomainError("seed ring touches the section");

    bool crossed = false;
    double t_hi = 0.0, t_prev = 0.0;
    auto stop = [&](double t, const AugmentedState& y) {
      if (!crossed) {
        const bool hit = opt.section ? ((opt.section(y.x) < 0.0) != (s0 < 0.0)) : (y.arc_length + ring_dist >= 1.0);
        if (hit) {
          crossed = true;
          t_hi = t;
        }
      }
      t_prev = t;
      if (far_flow_ && (y.x - far_flow_->origin).norm() < opt.far_radius) return true;
      return crossed && !far_flow_ && sigma_ * (t - t_hi) >= opt.p_extent + 1.0;
    };
    Node& node = nodes_[k];
    node.traj = solver.run(x0, 0.0, sigma_ * opt.max_time, stop);
    if (!crossed) throw IntegrationError("shooting chart: trajectory never reached the section");
    if (far_flow_ && (node.traj.back().x - far_flow_->origin).norm() >= opt.far_radius)
      throw IntegrationError("shooting chart: trajectory did not reach the far saddle");

    // Bisection on the dense output inside the step that crossed.
    const auto& times = node.traj.times();
    const auto it = std::find(times.begin(), times.end(), t_hi);
    const double t_lo = it == times.begin() ? times.front() : *(it - 1);
    std::function<double(double)> g;
    if (opt.section) {
      g = [&](double t) { return opt.section(node.traj.state_at(t)); };
    } else {
      g = [&](double t) { return node.traj.at(t).arc_length + ring_dist - 1.0; };
    }
    node.t_cross = bisect(g, t_lo, t_hi);
    node.p_seed = -node.t_cross;
    node.p_far = node.traj.t_end() - node.t_cross;
    p_far_limit = sigma_ > 0 ? std::min(p_far_limit, node.p_far) : std::max(p_far_limit, node.p_far);
    (void)t_prev;
  }

  if (far_flow_) {
    domain_.p_min = -std::numeric_limits<double>::infinity();
    domain_.p_max = std::numeric_limits<double>::infinity();
  } else if (sigma_ > 0) {
    domain_.p_max = p_far_limit;
  } else {
    domain_.p_min = p_far_limit;
  }
  check_foliation();
}

void ShootingChart::node_state(std::size_t k, double p, Vec3& x, double& d) const {
  const Node& node = nodes_[k];
  const double seed_side = sigma_ * (p - node.p_seed);
  const double far_side = sigma_ * (p - node.p_far);
  if (seed_side < 0.0) {
    // Between the saddle and the ring: linearized flow at the seed saddle.
    const AugmentedState s = node.traj.at(node.traj.t_begin());
    x = seed_flow_.advance(s.x, p - node.p_seed);
    d = s.divergence_integral + seed_flow_.trace * (p - node.p_seed);
    return;
  }
  if (far_side > 0.0) {
    if (!far_flow_) throw DomainError("chart sample: p outside the integrated range");
    const AugmentedState s = node.traj.back();
    x = far_flow_->advance(s.x, p - node.p_far);
    d = s.divergence_integral + far_flow_->trace * (p - node.p_far);
    return;
  }
  const AugmentedState s = node.traj.at(p + node.t_cross);
  x = s.x;
  d = s.divergence_integral;
}

ChartSample ShootingChart::sample(double p, double alpha) const {
  if (!std::isfinite(p) || !std::isfinite(alpha)) throw DomainError("chart sample: non-finite (p, alpha)");
  if (!domain_.contains(p)) throw DomainError("chart sample: p outside the chart domain");
  const auto st = spline_.at(alpha);
  ChartSample out;
  for (std::size_t j = 0; j < st.nodes.size(); ++j) {
    Vec3 x;
    double d;
    node_state(st.nodes[j], p, x, d);
    out.point += st.value[j] * x;
    out.alpha_partial += st.derivative[j] * x;
    out.divergence_accumulator += st.value[j] * d;
  }
  return out;
}

void ShootingChart::check_foliation() const {
  const std::size_t n = nodes_.size();
  for (double p : {-1.0, 0.0, 1.0}) {
    if (!domain_.contains(p)) continue;
    std::vector<Vec3> normals(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double alpha = static_cast<double>(k) / static_cast<double>(n);
      const ChartSample s = sample(p, alpha);
      normals[k] = wedge(field_->evaluate(s.point), s.alpha_partial);
      if (normals[k].norm() < 1e-12) throw FoliationError("shooting chart: degenerate normal");
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (normals[k].dot(normals[(k + 1) % n]) <= 0.0)
        throw FoliationError("shooting chart: adjacent trajectories cross");
    }
  }
}

}  // namespace

ChartPtr generic_chart_from_saddle(std::shared_ptr<const FieldModel> field, const SaddleSpectrum& spectrum,
                                   const GenericChartOptions& options) {
  if (!field) throw ConfigError("generic chart: null field");
  return std::make_shared<ShootingChart>(std::move(field), spectrum, options);
}

}  // namespace melnikov3d
