#include "melnikov3d/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <thread>

#include "melnikov3d/errors.hpp"
#include "melnikov3d/heteroclinic.hpp"
#include "melnikov3d/hill_closed_form.hpp"
#include "melnikov3d/io.hpp"
#include "melnikov3d/registry.hpp"
#include "melnikov3d/verification.hpp"

namespace melnikov3d {

using nlohmann::json;

namespace {

struct Setup {
  std::shared_ptr<const FieldModel> field;
  std::shared_ptr<const PerturbationModel> g;
  ChartPtr chart;
  json config;
  unsigned threads = 1;
};

Setup prepare(const RunConfig& cfg) {
  Setup s;
  s.field = make_field(cfg.model, cfg.model_params);
  s.g = make_perturbation(cfg.perturbation, cfg.perturbation_params);
  s.chart = make_chart(s.field, cfg.chart);
  s.config = to_json(cfg);
  s.threads = resolve_thread_count(cfg.threads);
  ensure_directory(cfg.out_dir);
  return s;
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

MelnikovKind kind_from_string(const std::string& k) {
  if (k == "unstable") return MelnikovKind::Unstable;
  if (k == "stable") return MelnikovKind::Stable;
  if (k == "heteroclinic") return MelnikovKind::Heteroclinic;
  throw ConfigError("unknown Melnikov kind '" + k + "'");
}

MelnikovKind chart_default_kind(const ManifoldChart& chart) {
  switch (chart.kind()) {
    case ChartKind::Unstable:
      return MelnikovKind::Unstable;
    case ChartKind::Stable:
      return MelnikovKind::Stable;
    default:
      return MelnikovKind::Heteroclinic;
  }
}

/// Kinds requested by cfg.kind; `both` expands to unstable and stable.
std::vector<MelnikovKind> requested_kinds(const RunConfig& cfg, const ManifoldChart& chart, bool surface) {
  if (cfg.kind == "both") return {MelnikovKind::Unstable, MelnikovKind::Stable};
  if (!cfg.kind.empty()) return {kind_from_string(cfg.kind)};
  if (surface && chart.kind() == ChartKind::Heteroclinic) return {MelnikovKind::Unstable, MelnikovKind::Stable};
  return {chart_default_kind(chart)};
}

void check_p_range(const RunConfig& cfg, const ManifoldChart& chart) {
  const ChartDomain d = chart.domain();
  if (!d.contains(cfg.p_min) || !d.contains(cfg.p_max))
    throw DomainError("p range [" + format_number(cfg.p_min) + ", " + format_number(cfg.p_max) +
                      "] leaves the chart domain [" + format_number(d.p_min) + ", " + format_number(d.p_max) + "]");
}

double single_eps(const RunConfig& cfg) {
  if (cfg.eps.size() != 1) throw ConfigError(cfg.command + " takes a single eps value");
  return cfg.eps.front();
}

MelnikovField grid_for(const RunConfig& cfg, const Setup& s, MelnikovKind kind) {
  check_p_range(cfg, *s.chart);
  return build_melnikov_grid(*s.chart, *s.g, cfg.t, cfg.p_min, cfg.p_max, cfg.n_p, cfg.n_alpha, cfg.quad, kind,
                             s.threads);
}

json field_stats(const MelnikovField& f) {
  return {{"kind", to_string(f.kind)},
          {"t", f.t},
          {"n_p", f.n_p()},
          {"n_alpha", f.n_alpha()},
          {"max_abs_M", f.values.size() ? f.values.cwiseAbs().maxCoeff() : 0.0},
          {"max_quadrature_error", f.error.size() ? f.error.maxCoeff() : 0.0},
          {"chart", f.chart_id},
          {"perturbation", f.perturbation_id}};
}

/// Writes the grid CSV; returns the max deviation from the closed form, if any.
std::optional<double> write_field_csv(const std::string& path, const RunConfig& cfg, const Setup& s,
                                      const MelnikovField& f) {
  const auto cf = closed_form(cfg.model, cfg.model_params, cfg.perturbation, cfg.perturbation_params, f.kind,
                              cfg.chart);
  std::vector<std::string> cols{"p", "alpha", "M", "dMdp", "dMdalpha", "quad_error"};
  if (cf) {
    cols.push_back("M_closed_form");
    cols.push_back("abs_diff");
  }
  CsvWriter w(path, s.config, cols);
  double worst = 0.0;
  for (std::size_t i = 0; i < f.n_p(); ++i) {
    for (std::size_t j = 0; j < f.n_alpha(); ++j) {
      const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
      std::vector<CsvCell> row{f.p[i], f.alpha[j], f.values(ii, jj), f.dMdp(ii, jj), f.dMdalpha(ii, jj),
                               f.error(ii, jj)};
      if (cf) {
        const double ref = (*cf)(f.p[i], f.alpha[j], f.t);
        const double diff = std::abs(f.values(ii, jj) - ref);
        worst = std::max(worst, diff);
        row.emplace_back(ref);
        row.emplace_back(diff);
      }
      w.row(row);
    }
  }
  if (cf) return worst;
  return std::nullopt;
}

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex m;
  auto work = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      try {
        fn(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(m);
        if (!err) err = std::current_exception();
        next = n;
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

void emit_plot_script(const RunConfig& cfg, CommandResult& res, const std::string& body) {
  if (!cfg.emit_plot_script) return;
  const std::string path = out_path(cfg, "plot_" + cfg.command + ".py");
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << "#!/usr/bin/env python3\n"
         "# Plots the output of `melnikov3d "
      << cfg.command
      << "` found next to this script.\n"
         "import os\nimport pandas as pd\nimport matplotlib\nmatplotlib.use(\"Agg\")\n"
         "import matplotlib.pyplot as plt\n\n"
         "here = os.path.dirname(os.path.abspath(__file__))\n\n"
         "def load(name):\n    return pd.read_csv(os.path.join(here, name), comment=\"#\")\n\n"
      << body;
  res.files.push_back(path);
}

std::string grid_plot(const std::string& csv, const std::string& column, const std::string& png) {
  return "d = load(\"" + csv + "\")\ngrid = d.pivot(index=\"p\", columns=\"alpha\", values=\"" + column +
         "\")\nfig, ax = plt.subplots(figsize=(7, 5))\n"
         "im = ax.pcolormesh(grid.columns, grid.index, grid.values, shading=\"auto\", cmap=\"RdBu_r\")\n"
         "ax.contour(grid.columns, grid.index, grid.values, levels=[0.0], colors=\"k\", linewidths=0.8)\n"
         "fig.colorbar(im, ax=ax, label=\"" +
         column + "\")\nax.set_xlabel(\"alpha\")\nax.set_ylabel(\"p\")\nfig.savefig(os.path.join(here, \"" + png +
         "\"), dpi=150)\n";
}

void finish(const RunConfig& cfg, CommandResult& res, std::ostream& log) {
  res.summary["config"] = to_json(cfg);
  const std::string path = out_path(cfg, cfg.command + ".json");
  write_json(path, res.summary);
  res.files.push_back(path);
  for (const auto& f : res.files) log << "wrote " << f << '\n';
}

}  // namespace

CommandResult cmd_models(const RunConfig&, std::ostream& log) {
  CommandResult res;
  json models = json::array(), perts = json::array();
  log << "models:\n";
  for (const auto& e : model_registry()) {
    log << "  " << e.name << "  " << e.description << '\n';
    json params = json::object();
    for (const auto& p : e.params) {
      log << "      --" << p.name << " (default " << format_number(p.default_value) << ")  " << p.description << '\n';
      params[p.name] = p.default_value;
    }
    models.push_back({{"name", e.name}, {"params", params}, {"default_chart", default_chart_name(e.name)}});
  }
  log << "perturbations:\n";
  for (const auto& e : perturbation_registry()) {
    log << "  " << e.name << "  " << e.description << '\n';
    json params = json::object();
    for (const auto& p : e.params) {
      log << "      --" << p.name << " (default " << format_number(p.default_value) << ")  " << p.description << '\n';
      params[p.name] = p.default_value;
    }
    perts.push_back({{"name", e.name}, {"params", params}});
  }
  res.summary = {{"models", models}, {"perturbations", perts}};
  return res;
}

CommandResult cmd_chart(const RunConfig& cfg, std::ostream& log) {
  const Setup s = prepare(cfg);
  check_p_range(cfg, *s.chart);
  CommandResult res;
  const std::string path = out_path(cfg, "chart.csv");
  CsvWriter w(path, s.config, {"p", "alpha", "x", "y", "z", "r", "theta", "phi", "normal_norm"});
  std::vector<Vec3> verts;
  verts.reserve(cfg.n_p * cfg.n_alpha);
  for (std::size_t i = 0; i < cfg.n_p; ++i) {
    const double p = cfg.p_min + (cfg.p_max - cfg.p_min) * static_cast<double>(i) / static_cast<double>(cfg.n_p - 1);
    for (std::size_t j = 0; j < cfg.n_alpha; ++j) {
      const double a = static_cast<double>(j) / static_cast<double>(cfg.n_alpha);
      const Vec3 x = s.chart->point(p, a);
      const SphericalPoint sp = cartesian_to_spherical(x);
      w.row({p, a, x.x(), x.y(), x.z(), sp.r, sp.theta, sp.phi, chart_normal(*s.chart, p, a).norm()});
      verts.push_back(x);
    }
  }
  res.files.push_back(path);
  const std::string mesh = out_path(cfg, "chart.mesh");
  write_mesh(mesh, s.config, s.chart->id(), verts, periodic_grid_triangles(cfg.n_p, cfg.n_alpha));
  res.files.push_back(mesh);
  const ChartDomain d = s.chart->domain();
  res.summary = {{"chart", s.chart->id()},
                 {"chart_kind", to_string(s.chart->kind())},
                 {"domain", {{"p_min", d.p_min}, {"p_max", d.p_max}}}};
  emit_plot_script(cfg, res,
                   "d = load(\"chart.csv\")\nfig = plt.figure(figsize=(6, 6))\n"
                   "ax = fig.add_subplot(projection=\"3d\")\n"
                   "ax.scatter(d.x, d.y, d.z, c=d.p, s=2, cmap=\"viridis\")\n"
                   "fig.savefig(os.path.join(here, \"chart.png\"), dpi=150)\n");
  log << "chart " << s.chart->id() << ": " << cfg.n_p << " x " << cfg.n_alpha << " nodes\n";
  finish(cfg, res, log);
  return res;
}

CommandResult cmd_melnikov(const RunConfig& cfg, std::ostream& log) {
  const Setup s = prepare(cfg);
  CommandResult res;
  json fields = json::array();
  std::string plots;
  for (MelnikovKind kind : requested_kinds(cfg, *s.chart, false)) {
    const MelnikovField f = grid_for(cfg, s, kind);
    const std::string name = std::string("melnikov_") + to_string(kind) + ".csv";
    const auto worst = write_field_csv(out_path(cfg, name), cfg, s, f);
    res.files.push_back(out_path(cfg, name));
    json stats = field_stats(f);
    stats["file"] = name;
    log << to_string(kind) << " grid " << f.n_p() << " x " << f.n_alpha()
        << ": max|M| = " << format_number(stats["max_abs_M"].get<double>());
    if (worst) {
      stats["max_abs_diff_closed_form"] = *worst;
      log << ", max |M - closed form| = " << format_number(*worst);
    }
    log << '\n';
    fields.push_back(stats);
    plots += grid_plot(name, "M", std::string("melnikov_") + to_string(kind) + ".png");
  }
  res.summary = {{"fields", fields}};
  emit_plot_script(cfg, res, plots);
  finish(cfg, res, log);
  return res;
}

CommandResult cmd_surface(const RunConfig& cfg, std::ostream& log) {
  const Setup s = prepare(cfg);
  const double eps = single_eps(cfg);
  CommandResult res;

  const std::size_t np = cfg.n_p, na = cfg.n_alpha;
  std::vector<Vec3> base(np * na);
  std::vector<double> pv(np), av(na);
  for (std::size_t i = 0; i < np; ++i)
    pv[i] = cfg.p_min + (cfg.p_max - cfg.p_min) * static_cast<double>(i) / static_cast<double>(np - 1);
  for (std::size_t j = 0; j < na; ++j) av[j] = static_cast<double>(j) / static_cast<double>(na);
  for (std::size_t i = 0; i < np; ++i)
    for (std::size_t j = 0; j < na; ++j) base[i * na + j] = s.chart->point(pv[i], av[j]);

  const auto tris = periodic_grid_triangles(np, na);
  const std::string base_mesh = out_path(cfg, "surface_unperturbed.mesh");
  write_mesh(base_mesh, s.config, "unperturbed", base, tris);

  const std::string path = out_path(cfg, "surface.csv");
  CsvWriter w(path, s.config,
              {"kind", "p", "alpha", "x", "y", "z", "x0", "y0", "z0", "r", "M", "d", "valid"});
  json kinds = json::array();
  std::string plots;
  for (MelnikovKind kind : requested_kinds(cfg, *s.chart, true)) {
    if (kind == MelnikovKind::Heteroclinic) throw ConfigError("surface needs unstable or stable kind");
    const MelnikovField f = grid_for(cfg, s, kind);
    // The approximation degrades near the saddle the surface runs into.
    const auto& saddle = kind == MelnikovKind::Unstable ? s.chart->downstream_saddle() : s.chart->upstream_saddle();
    std::vector<Vec3> moved(np * na);
    std::size_t flagged = 0;
    for (std::size_t i = 0; i < np; ++i) {
      for (std::size_t j = 0; j < na; ++j) {
        const double M = f.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        const Vec3 n = chart_normal(*s.chart, pv[i], av[j]);
        const Vec3& x0 = base[i * na + j];
        const Vec3 x = x0 + (eps * M / n.squaredNorm()) * n;
        const double d = eps * M / n.norm();
        const bool valid = !saddle || std::abs(d) <= cfg.validity_fraction * (x0 - saddle->location).norm();
        if (!valid) ++flagged;
        moved[i * na + j] = x;
        w.row({to_string(kind), pv[i], av[j], x.x(), x.y(), x.z(), x0.x(), x0.y(), x0.z(), x.norm(), M, d, valid});
      }
    }
    const std::string mesh = out_path(cfg, std::string("surface_") + to_string(kind) + ".mesh");
    write_mesh(mesh, s.config, to_string(kind), moved, tris);
    res.files.push_back(mesh);
    kinds.push_back({{"kind", to_string(kind)}, {"flagged_rows", flagged}, {"rows", np * na}});
    log << to_string(kind) << " surface: " << np * na << " nodes, " << flagged << " flagged outside the validity window\n";
    if (flagged) log << "warning: " << flagged << " " << to_string(kind) << " rows have valid = 0\n";
  }
  res.files.insert(res.files.begin(), {path, base_mesh});
  res.summary = {{"eps", eps}, {"surfaces", kinds}};
  emit_plot_script(cfg, res,
                   "d = load(\"surface.csv\")\nfig = plt.figure(figsize=(7, 6))\n"
                   "ax = fig.add_subplot(projection=\"3d\")\n"
                   "for kind, colour in ((\"unstable\", \"tab:red\"), (\"stable\", \"tab:blue\")):\n"
                   "    s = d[(d.kind == kind) & (d.valid == 1)]\n"
                   "    ax.scatter(s.x, s.y, s.z, s=1, c=colour, label=kind)\n"
                   "ax.legend()\nfig.savefig(os.path.join(here, \"surface.png\"), dpi=150)\n");
  finish(cfg, res, log);
  return res;
}

namespace {

double auto_threshold(const RunConfig& cfg, const MelnikovField& f) {
  if (cfg.grad_threshold >= 0.0) return cfg.grad_threshold;
  const double g = (f.dMdp.cwiseAbs() + f.dMdalpha.cwiseAbs()).maxCoeff();
  return 1e-6 * g;
}

ContourSet contours_for(const RunConfig& cfg, const Setup& s, const MelnikovField& f) {
  ContourSet cs = zero_contours(f, auto_threshold(cfg, f));
  if (cfg.refine_contours) {
    const MelnikovKind kind = f.kind;
    refine_contours(cs, f, [&](double p, double a) { return melnikov(kind, *s.chart, *s.g, p, a, f.t, cfg.quad).value; });
  }
  return cs;
}

MelnikovKind analysis_kind(const RunConfig& cfg, const ManifoldChart& chart) {
  const auto kinds = requested_kinds(cfg, chart, false);
  if (kinds.size() != 1) throw ConfigError(cfg.command + " takes a single kind");
  return kinds.front();
}

}  // namespace

CommandResult cmd_contours(const RunConfig& cfg, std::ostream& log) {
  const Setup s = prepare(cfg);
  CommandResult res;
  const MelnikovField f = grid_for(cfg, s, analysis_kind(cfg, *s.chart));
  const ContourSet cs = contours_for(cfg, s, f);

  const std::string grid_name = std::string("melnikov_") + to_string(f.kind) + ".csv";
  write_field_csv(out_path(cfg, grid_name), cfg, s, f);

  const std::string path = out_path(cfg, "contours.csv");
  CsvWriter w(path, s.config, {"contour_id", "vertex", "p", "alpha", "theta", "phi", "transverse", "x", "y", "z"});
  json list = json::array();
  for (const auto& c : cs.contours) {
    std::size_t transverse = 0;
    double pmin = INFINITY, pmax = -INFINITY;
    for (std::size_t k = 0; k < c.vertices.size(); ++k) {
      const auto& v = c.vertices[k];
      const Vec3 x = s.chart->point(v.p, v.alpha);
      const SphericalPoint sp = cartesian_to_spherical(x);
      w.row({c.id, k, v.p, v.alpha, sp.theta, sp.phi, v.transverse, x.x(), x.y(), x.z()});
      transverse += v.transverse;
      pmin = std::min(pmin, v.p);
      pmax = std::max(pmax, v.p);
    }
    list.push_back({{"id", c.id},
                    {"closed", c.closed},
                    {"vertices", c.vertices.size()},
                    {"transverse_vertices", transverse},
                    {"p_min", pmin},
                    {"p_max", pmax}});
  }
  res.files = {path, out_path(cfg, grid_name)};
  res.summary = {{"contour_count", cs.contours.size()},
                 {"vertex_count", cs.vertex_count()},
                 {"grad_threshold", cs.grad_threshold},
                 {"zero_snap", cs.snap},
                 {"refined", cfg.refine_contours},
                 {"contours", list}};
  log << cs.contours.size() << " zero contours, " << cs.vertex_count() << " vertices\n";
  emit_plot_script(cfg, res,
                   "d = load(\"contours.csv\")\nfig, ax = plt.subplots(figsize=(7, 5))\n"
                   "for cid, c in d.groupby(\"contour_id\"):\n"
                   "    ax.plot(c.alpha, c.p, \".\", ms=1.5)\n"
                   "ax.set_xlabel(\"alpha\")\nax.set_ylabel(\"p\")\n"
                   "fig.savefig(os.path.join(here, \"contours.png\"), dpi=150)\n");
  finish(cfg, res, log);
  return res;
}

CommandResult cmd_lobes(const RunConfig& cfg, std::ostream& log) {
  const Setup s = prepare(cfg);
  const double eps = single_eps(cfg);
  CommandResult res;
  const MelnikovField f = grid_for(cfg, s, analysis_kind(cfg, *s.chart));
  const ContourSet cs = contours_for(cfg, s, f);
  const auto regions = lobe_regions(f, cs);

  const std::string path = out_path(cfg, "lobes.csv");
  CsvWriter w(path, s.config,
              {"id", "sign", "nodes", "boundary_nodes", "unbounded", "p_min", "p_max", "alpha_min", "alpha_max",
               "volume_leading", "volume_error_estimate"});
  json list = json::array();
  std::size_t bounded = 0;
  for (const auto& r : regions) {
    double pmin = INFINITY, pmax = -INFINITY, amin = INFINITY, amax = -INFINITY;
    for (const auto& [i, j] : r.cells) {
      pmin = std::min(pmin, f.p[i]);
      pmax = std::max(pmax, f.p[i]);
      amin = std::min(amin, f.alpha[j]);
      amax = std::max(amax, f.alpha[j]);
    }
    json item = {{"id", r.id},
                 {"sign", r.sign},
                 {"nodes", r.cells.size()},
                 {"boundary_nodes", r.boundary_cells.size()},
                 {"boundary_contours", r.boundary_contours},
                 {"unbounded", r.unbounded},
                 {"node_p_range", {pmin, pmax}},
                 {"node_alpha_range", {amin, amax}},
                 {"t", f.t},
                 {"eps", eps}};
    double vol = NAN, err = NAN;
    if (r.unbounded) {
      item["note"] = "touches the p boundary of the grid; volume unreliable";
    } else {
      const LobeReport v = lobe_volume(f, r, eps);
      vol = v.volume_leading;
      err = v.volume_error_estimate;
      item["volume_leading"] = vol;
      item["volume_error_estimate"] = err;
      item["abs_integral"] = v.abs_integral;
      ++bounded;
    }
    w.row({r.id, r.sign, r.cells.size(), r.boundary_cells.size(), r.unbounded, pmin, pmax, amin, amax, vol, err});
    list.push_back(item);
  }
  res.files.push_back(path);
  res.summary = {{"eps", eps}, {"t", f.t}, {"regions", list}, {"bounded_regions", bounded}};
  if (cfg.model == "hill-classical" && cfg.perturbation == "gr")
    res.summary["reference_lobe_volume"] = eps * hill_lobe_integral();
  log << regions.size() << " sign-definite regions, " << bounded << " bounded\n";
  for (const auto& item : list)
    if (item.contains("volume_leading"))
      log << "  lobe " << item["id"].get<std::size_t>() << " (sign " << item["sign"].get<int>()
          << "): volume " << format_number(item["volume_leading"].get<double>()) << " +- "
          << format_number(item["volume_error_estimate"].get<double>()) << '\n';
  emit_plot_script(cfg, res,
                   grid_plot(std::string("melnikov_") + to_string(f.kind) + ".csv", "M", "lobes.png"));
  if (cfg.emit_plot_script) {
    const std::string grid_name = std::string("melnikov_") + to_string(f.kind) + ".csv";
    write_field_csv(out_path(cfg, grid_name), cfg, s, f);
    res.files.push_back(out_path(cfg, grid_name));
  }
  finish(cfg, res, log);
  return res;
}

CommandResult cmd_verify(const RunConfig& cfg, std::ostream& log) {
  const Setup s = prepare(cfg);
  CommandResult res;

  std::vector<std::array<double, 3>> pts = cfg.points;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t k = 0; k < cfg.random_points; ++k) {
    const double p = -1.0 + 2.0 * unit(rng);
    const double a = unit(rng);
    const double t = -1.0 + 2.0 * unit(rng);
    pts.push_back({p, a, t});
  }
  if (pts.empty()) throw ConfigError("verify needs points or random_points");

  std::vector<MelnikovKind> kinds;
  if (cfg.kind.empty() || cfg.kind == "unstable") kinds = {MelnikovKind::Unstable};
  else if (cfg.kind == "both") kinds = {MelnikovKind::Unstable, MelnikovKind::Stable};
  else kinds = {kind_from_string(cfg.kind)};

  struct Job {
    MelnikovKind kind;
    std::size_t point;
    double eps;
  };
  std::vector<Job> jobs;
  for (MelnikovKind kind : kinds)
    for (std::size_t k = 0; k < pts.size(); ++k)
      for (double e : cfg.eps) jobs.push_back({kind, k, e});

  OracleOptions opt;
  opt.tol = cfg.oracle_tol;
  opt.quad = cfg.quad;
  std::vector<DisplacementSample> samples(jobs.size());
  parallel_for(jobs.size(), s.threads, [&](std::size_t n) {
    const Job& jb = jobs[n];
    const auto& q = pts[jb.point];
    const double launch = jb.kind == MelnikovKind::Stable ? q[0] + cfg.launch_depth : q[0] - cfg.launch_depth;
    samples[n] = measure_displacement(*s.chart, *s.g, jb.eps, q[0], q[1], q[2], launch, jb.kind, opt);
  });

  const std::string spath = out_path(cfg, "samples.csv");
  CsvWriter sw(spath, s.config,
               {"kind", "p", "alpha", "t", "eps", "p_launch", "measured_d", "predicted_d", "M", "abs_error",
                "seeding_error_estimate"});
  for (const auto& x : samples)
    sw.row({to_string(x.kind), x.p, x.alpha, x.t, x.eps, x.p_launch, x.measured_d, x.predicted_d, x.melnikov,
            x.error(), x.seeding_error_estimate});

  const std::string fpath = out_path(cfg, "fits.csv");
  CsvWriter fw(fpath, s.config, {"kind", "p", "alpha", "t", "slope", "intercept", "r2", "saturated"});
  json fits = json::array();
  const std::size_t per = cfg.eps.size();
  double smin = INFINITY, smax = -INFINITY;
  for (std::size_t k = 0; k * per < samples.size(); ++k) {
    std::vector<DisplacementSample> group(samples.begin() + static_cast<std::ptrdiff_t>(k * per),
                                          samples.begin() + static_cast<std::ptrdiff_t>((k + 1) * per));
    const auto& g0 = group.front();
    json item = {{"kind", to_string(g0.kind)}, {"p", g0.p}, {"alpha", g0.alpha}, {"t", g0.t}};
    if (per < 3) {
      item["note"] = "order fit needs at least three eps values";
      fits.push_back(item);
      continue;
    }
    const OrderFit fit = fit_order(group);
    fw.row({to_string(g0.kind), g0.p, g0.alpha, g0.t, fit.slope, fit.intercept, fit.r2, fit.saturated});
    item["slope"] = fit.slope;
    item["intercept"] = fit.intercept;
    item["r2"] = fit.r2;
    item["saturated"] = fit.saturated;
    if (!fit.saturated) {
      smin = std::min(smin, fit.slope);
      smax = std::max(smax, fit.slope);
    }
    log << to_string(g0.kind) << " (p, alpha, t) = (" << format_number(g0.p) << ", " << format_number(g0.alpha)
        << ", " << format_number(g0.t) << "): slope " << format_number(fit.slope)
        << (fit.saturated ? " (saturated)" : "") << '\n';
    fits.push_back(item);
  }
  res.files = {spath, fpath};
  res.summary = {{"samples", samples.size()}, {"fits", fits}};
  if (std::isfinite(smin)) res.summary["slope_range"] = {smin, smax};
  emit_plot_script(cfg, res,
                   "d = load(\"samples.csv\")\nfig, ax = plt.subplots(figsize=(6, 5))\n"
                   "for key, g in d.groupby([\"kind\", \"p\", \"alpha\", \"t\"]):\n"
                   "    ax.loglog(g.eps, g.abs_error, \"o-\", label=str(key))\n"
                   "ax.loglog(d.eps, d.eps**2, \"k--\", label=\"eps^2\")\n"
                   "ax.set_xlabel(\"eps\")\nax.set_ylabel(\"|measured - predicted|\")\nax.legend(fontsize=6)\n"
                   "fig.savefig(os.path.join(here, \"verify.png\"), dpi=150)\n");
  finish(cfg, res, log);
  return res;
}

CommandResult run_command(RunConfig cfg, std::ostream& log) {
  validate(cfg);
  if (cfg.command == "models") return cmd_models(cfg, log);
  if (cfg.command == "chart") return cmd_chart(cfg, log);
  if (cfg.command == "melnikov") return cmd_melnikov(cfg, log);
  if (cfg.command == "surface") return cmd_surface(cfg, log);
  if (cfg.command == "contours") return cmd_contours(cfg, log);
  if (cfg.command == "lobes") return cmd_lobes(cfg, log);
  return cmd_verify(cfg, log);
}

}  // namespace melnikov3d
