// melnikov3d command-line tool. See docs/file_formats.md for the outputs.
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "melnikov3d/commands.hpp"
#include "melnikov3d/errors.hpp"

namespace {

using namespace melnikov3d;

struct Flags {
  std::string config, model, perturbation, chart, eps, p, points, kind, rule, truncation, out;
  double t = 0, rel_tol = 0, abs_tol = 0, fixed_cut = 0, grad_threshold = 0, launch_depth = 0, oracle_tol = 0,
         validity_fraction = 0;
  std::map<std::string, double> params;  // model and perturbation parameters by name
  std::size_t alpha = 0, random_points = 0;
  std::uint64_t seed = 0;
  int threads = 0;
  bool emit_plot_script = false, no_divergence_weight = false, refine = false;
};

struct Registered {
  std::map<std::string, CLI::Option*> opts;
  bool given(const std::string& name) const {
    auto it = opts.find(name);
    return it != opts.end() && it->second->count() > 0;
  }
};

void add_options(CLI::App* sub, Flags& f, Registered& r) {
  auto add = [&](const std::string& key, CLI::Option* o) { r.opts[key] = o; };
  add("config", sub->add_option("--config", f.config, "JSON config file; flags override its values"));
  add("model", sub->add_option("--model", f.model, "hill-classical | hill-swirl | linear-saddle"));
  add("perturbation", sub->add_option("--perturbation", f.perturbation, "none | gr | gtheta | gr-positive | uniform-z"));
  add("chart", sub->add_option("--chart", f.chart, "analytic | generic"));
  for (const char* name : {"R0", "l", "omega", "s"})
    add(name, sub->add_option(std::string("--") + name, f.params[name], std::string("model parameter ") + name));
  add("kappa", sub->add_option("--kappa", f.params["kappa"], "uniform-z forcing frequency"));
  add("t", sub->add_option("--t", f.t, "time slice"));
  add("eps", sub->add_option("--eps", f.eps, "perturbation size; comma separated list for verify"));
  add("p", sub->add_option("--p", f.p, "p grid as min:max:n"));
  add("alpha", sub->add_option("--alpha", f.alpha, "number of alpha nodes"));
  add("kind", sub->add_option("--kind", f.kind, "unstable | stable | heteroclinic | both"));
  add("rel_tol", sub->add_option("--rel-tol", f.rel_tol, "quadrature relative tolerance"));
  add("abs_tol", sub->add_option("--abs-tol", f.abs_tol, "quadrature absolute tolerance"));
  add("rule", sub->add_option("--rule", f.rule, "adaptive-simpson | gauss-legendre"));
  add("truncation", sub->add_option("--truncation", f.truncation, "adaptive | fixed"));
  add("fixed_cut", sub->add_option("--fixed-cut", f.fixed_cut, "|tau - p| cut for fixed truncation"));
  add("no_divergence_weight",
      sub->add_flag("--no-divergence-weight", f.no_divergence_weight, "drop the exp(int div f) weight"));
  add("grad_threshold", sub->add_option("--grad-threshold", f.grad_threshold,
                                        "transversality threshold (default 1e-6 max|grad M|)"));
  add("refine", sub->add_flag("--refine", f.refine, "polish contour vertices with fresh quadratures"));
  add("points", sub->add_option("--points", f.points, "oracle tuples p,alpha,t;p,alpha,t;..."));
  add("random_points", sub->add_option("--random-points", f.random_points, "extra random oracle tuples"));
  add("seed", sub->add_option("--seed", f.seed, "seed for random tuples"));
  add("launch_depth", sub->add_option("--launch-depth", f.launch_depth, "oracle launch distance in p"));
  add("oracle_tol", sub->add_option("--oracle-tol", f.oracle_tol, "oracle integrator tolerance"));
  add("validity_fraction",
      sub->add_option("--validity-fraction", f.validity_fraction, "surface validity window (see docs)"));
  add("threads", sub->add_option("--threads", f.threads, "worker threads (default MELNIKOV3D_THREADS or 1)"));
  add("out", sub->add_option("--out", f.out, "output directory"));
  add("emit_plot_script", sub->add_flag("--emit-plot-script", f.emit_plot_script, "write a matplotlib script"));
}

RunConfig build_config(const std::string& command, const Flags& f, const Registered& r) {
  RunConfig c = r.given("config") ? load_config_file(f.config, command) : default_config(command);
  c.command = command;
  if (r.given("model")) {
    // A new model invalidates parameters taken from a config file.
    if (f.model != c.model) c.model_params.clear();
    c.model = f.model;
  }
  if (r.given("perturbation")) {
    if (f.perturbation != c.perturbation) c.perturbation_params.clear();
    c.perturbation = f.perturbation;
  }
  if (r.given("chart")) c.chart = f.chart;
  for (const char* name : {"R0", "l", "omega", "s"})
    if (r.given(name)) c.model_params[name] = f.params.at(name);
  if (r.given("kappa")) c.perturbation_params["kappa"] = f.params.at("kappa");
  if (r.given("t")) c.t = f.t;
  if (r.given("eps")) c.eps = parse_number_list(f.eps);
  if (r.given("p")) parse_p_range(f.p, c);
  if (r.given("alpha")) c.n_alpha = f.alpha;
  if (r.given("kind")) c.kind = f.kind;
  if (r.given("rel_tol")) c.quad.rel_tol = f.rel_tol;
  if (r.given("abs_tol")) c.quad.abs_tol = f.abs_tol;
  if (r.given("rule")) c.quad.rule = quadrature_rule_from_string(f.rule);
  if (r.given("truncation")) {
    if (f.truncation == "adaptive") c.quad.truncation = TruncationPolicy::Adaptive;
    else if (f.truncation == "fixed") c.quad.truncation = TruncationPolicy::Fixed;
    else throw ConfigError("--truncation must be adaptive or fixed");
  }
  if (r.given("fixed_cut")) c.quad.fixed_cut = f.fixed_cut;
  if (r.given("no_divergence_weight")) c.quad.divergence_weight = false;
  if (r.given("grad_threshold")) c.grad_threshold = f.grad_threshold;
  if (r.given("refine")) c.refine_contours = true;
  if (r.given("points")) c.points = parse_points(f.points);
  if (r.given("random_points")) c.random_points = f.random_points;
  if (r.given("seed")) c.seed = f.seed;
  if (r.given("launch_depth")) c.launch_depth = f.launch_depth;
  if (r.given("oracle_tol")) c.oracle_tol = f.oracle_tol;
  if (r.given("validity_fraction")) c.validity_fraction = f.validity_fraction;
  if (r.given("threads")) c.threads = f.threads;
  if (r.given("out")) c.out_dir = f.out;
  if (r.given("emit_plot_script")) c.emit_plot_script = true;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Melnikov functions, manifold displacement and lobe volumes for 3D flows"};
  app.require_subcommand(1);

  const std::map<std::string, std::string> commands = {
      {"models", "list registered models and perturbations"},
      {"chart", "sample the unperturbed manifold chart"},
      {"melnikov", "Melnikov function on a (p, alpha) grid"},
      {"surface", "leading-order perturbed manifolds as meshes"},
      {"contours", "zero contours of the Melnikov function"},
      {"lobes", "sign-definite regions and their leading-order volumes"},
      {"verify", "direct-integration check of the displacement and its order in eps"},
  };
  Flags flags;
  std::map<std::string, Registered> registered;
  for (const auto& [name, help] : commands) add_options(app.add_subcommand(name, help), flags, registered[name]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (const auto& [name, help] : commands) {
      if (!app.got_subcommand(name)) continue;
      RunConfig cfg = build_config(name, flags, registered.at(name));
      run_command(cfg, std::cout);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
