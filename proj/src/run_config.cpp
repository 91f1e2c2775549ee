#include "melnikov3d/run_config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "melnikov3d/errors.hpp"
#include "melnikov3d/registry.hpp"

namespace melnikov3d {

using nlohmann::json;

RunConfig default_config(const std::string& command) {
  RunConfig c;
  c.command = command;
  if (command == "lobes") {
    c.n_p = 400;
    c.n_alpha = 384;
  } else if (command == "verify") {
    c.eps = {1e-2, 3e-3, 1e-3};
    c.points = {{0.0, 1.0 / 12.0, 0.0}, {0.5, 0.1, 0.2}, {-0.5, 0.4, 1.0}, {1.0, 0.25, 0.3}, {0.2, 0.9, -0.7}};
  } else if (command == "chart" || command == "surface") {
    c.n_p = 81;
    c.n_alpha = 64;
  }
  return c;
}

namespace {

json params_json(const ModelParams& p) {
  json j = json::object();
  for (const auto& [k, v] : p) j[k] = v;
  return j;
}

ModelParams params_from(const json& j, const char* key) {
  if (!j.is_object()) throw ConfigError(std::string(key) + " must be an object");
  ModelParams p;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number()) throw ConfigError(std::string(key) + "." + k + " must be a number");
    p[k] = v.get<double>();
  }
  return p;
}

const char* truncation_name(TruncationPolicy t) { return t == TruncationPolicy::Adaptive ? "adaptive" : "fixed"; }

}  // namespace

json to_json(const RunConfig& c) {
  json q = {{"rel_tol", c.quad.rel_tol},
            {"abs_tol", c.quad.abs_tol},
            {"truncation", truncation_name(c.quad.truncation)},
            {"fixed_cut", c.quad.fixed_cut},
            {"rule", to_string(c.quad.rule)},
            {"max_subdivisions", c.quad.max_subdivisions},
            {"divergence_weight", c.quad.divergence_weight}};
  json pts = json::array();
  for (const auto& p : c.points) pts.push_back({p[0], p[1], p[2]});
  return json{{"command", c.command},
              {"model", c.model},
              {"model_params", params_json(c.model_params)},
              {"perturbation", c.perturbation},
              {"perturbation_params", params_json(c.perturbation_params)},
              {"chart", c.chart},
              {"t", c.t},
              {"eps", c.eps},
              {"p_min", c.p_min},
              {"p_max", c.p_max},
              {"n_p", c.n_p},
              {"n_alpha", c.n_alpha},
              {"quadrature", q},
              {"kind", c.kind},
              {"grad_threshold", c.grad_threshold},
              {"refine_contours", c.refine_contours},
              {"points", pts},
              {"random_points", c.random_points},
              {"seed", c.seed},
              {"launch_depth", c.launch_depth},
              {"oracle_tol", c.oracle_tol},
              {"validity_fraction", c.validity_fraction},
              {"threads", c.threads},
              {"out_dir", c.out_dir},
              {"emit_plot_script", c.emit_plot_script}};
}

void merge_json(RunConfig& c, const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    for (const auto& [k, v] : j.items()) {
      if (k == "command") {
        // The subcommand on the command line wins; the key is accepted so
        // that an output header can be fed back as a config file.
      } else if (k == "model") c.model = v.get<std::string>();
      else if (k == "model_params") c.model_params = params_from(v, "model_params");
      else if (k == "perturbation") c.perturbation = v.get<std::string>();
      else if (k == "perturbation_params") c.perturbation_params = params_from(v, "perturbation_params");
      else if (k == "chart") c.chart = v.get<std::string>();
      else if (k == "t") c.t = v.get<double>();
      else if (k == "eps") c.eps = v.is_array() ? v.get<std::vector<double>>() : std::vector<double>{v.get<double>()};
      else if (k == "p_min") c.p_min = v.get<double>();
      else if (k == "p_max") c.p_max = v.get<double>();
      else if (k == "n_p") c.n_p = v.get<std::size_t>();
      else if (k == "n_alpha") c.n_alpha = v.get<std::size_t>();
      else if (k == "quadrature") {
        if (!v.is_object()) throw ConfigError("quadrature must be an object");
        for (const auto& [qk, qv] : v.items()) {
          if (qk == "rel_tol") c.quad.rel_tol = qv.get<double>();
          else if (qk == "abs_tol") c.quad.abs_tol = qv.get<double>();
          else if (qk == "fixed_cut") c.quad.fixed_cut = qv.get<double>();
          else if (qk == "max_subdivisions") c.quad.max_subdivisions = qv.get<std::size_t>();
          else if (qk == "divergence_weight") c.quad.divergence_weight = qv.get<bool>();
          else if (qk == "rule") c.quad.rule = quadrature_rule_from_string(qv.get<std::string>());
          else if (qk == "truncation") {
            const auto s = qv.get<std::string>();
            if (s == "adaptive") c.quad.truncation = TruncationPolicy::Adaptive;
            else if (s == "fixed") c.quad.truncation = TruncationPolicy::Fixed;
            else throw ConfigError("unknown truncation policy '" + s + "'");
          } else throw ConfigError("unknown quadrature key '" + qk + "'");
        }
      } else if (k == "kind") c.kind = v.get<std::string>();
      else if (k == "grad_threshold") c.grad_threshold = v.get<double>();
      else if (k == "refine_contours") c.refine_contours = v.get<bool>();
      else if (k == "points") {
        c.points.clear();
        for (const auto& p : v) {
          const auto a = p.get<std::vector<double>>();
          if (a.size() != 3) throw ConfigError("points entries must be [p, alpha, t]");
          c.points.push_back({a[0], a[1], a[2]});
        }
      } else if (k == "random_points") c.random_points = v.get<std::size_t>();
      else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else if (k == "launch_depth") c.launch_depth = v.get<double>();
      else if (k == "oracle_tol") c.oracle_tol = v.get<double>();
      else if (k == "validity_fraction") c.validity_fraction = v.get<double>();
      else if (k == "threads") c.threads = v.get<int>();
      else if (k == "out_dir") c.out_dir = v.get<std::string>();
      else if (k == "emit_plot_script") c.emit_plot_script = v.get<bool>();
      else throw ConfigError("unknown config key '" + k + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig load_config_file(const std::string& path, const std::string& command) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  RunConfig c = default_config(command);
  merge_json(c, j);
  return c;
}

void validate(RunConfig& c) {
  static const std::set<std::string> commands = {"models", "chart", "melnikov", "surface", "contours", "lobes", "verify"};
  if (!commands.count(c.command)) throw ConfigError("unknown command '" + c.command + "'");
  c.model_params = resolve_model_params(c.model, c.model_params);
  c.perturbation_params = resolve_perturbation_params(c.perturbation, c.perturbation_params);
  if (c.chart.empty()) c.chart = default_chart_name(c.model);
  if (c.chart != "analytic" && c.chart != "generic") throw ConfigError("chart must be 'analytic' or 'generic'");
  if (c.model == "linear-saddle" && c.chart != "generic") throw ConfigError("linear-saddle only has a generic chart");

  if (!std::isfinite(c.t)) throw ConfigError("t must be finite");
  if (!std::isfinite(c.p_min) || !std::isfinite(c.p_max) || !(c.p_min < c.p_max))
    throw ConfigError("p range needs finite min < max");
  if (c.n_p < 8 || c.n_alpha < 8) throw ConfigError("grids need at least 8 points in p and alpha");
  if (c.eps.empty()) throw ConfigError("eps list is empty");
  for (double e : c.eps)
    if (!std::isfinite(e) || e < 0.0) throw ConfigError("eps values must be finite and non-negative");
  c.quad.validate();

  static const std::set<std::string> kinds = {"", "unstable", "stable", "heteroclinic", "both"};
  if (!kinds.count(c.kind)) throw ConfigError("kind must be unstable, stable, heteroclinic or both");
  if (c.command == "surface" && c.kind == "heteroclinic")
    throw ConfigError("surface kind must be unstable, stable or both");

  for (const auto& p : c.points)
    if (!std::isfinite(p[0]) || !std::isfinite(p[1]) || !std::isfinite(p[2]))
      throw ConfigError("points must be finite");
  if (!(c.launch_depth > 0.0)) throw ConfigError("launch_depth must be positive");
  if (!(c.oracle_tol > 0.0)) throw ConfigError("oracle_tol must be positive");
  if (!(c.validity_fraction > 0.0)) throw ConfigError("validity_fraction must be positive");
  if (c.threads < 0) throw ConfigError("threads must be non-negative");
}

void parse_p_range(const std::string& spec, RunConfig& c) {
  std::stringstream ss(spec);
  std::string a, b, n;
  if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, n) || n.find(':') != std::string::npos)
    throw ConfigError("--p expects min:max:n, got '" + spec + "'");
  try {
    std::size_t used = 0;
    c.p_min = std::stod(a);
    c.p_max = std::stod(b);
    const long long count = std::stoll(n, &used);
    if (used != n.size() || count < 0) throw ConfigError("bad count");
    c.n_p = static_cast<std::size_t>(count);
  } catch (const std::exception&) {
    throw ConfigError("--p expects min:max:n, got '" + spec + "'");
  }
}

std::vector<double> parse_number_list(const std::string& spec) {
  std::vector<double> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw ConfigError("trailing characters");
    } catch (const std::exception&) {
      throw ConfigError("bad number '" + item + "' in list '" + spec + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty number list");
  return out;
}

std::vector<std::array<double, 3>> parse_points(const std::string& spec) {
  std::vector<std::array<double, 3>> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ';')) {
    const auto v = parse_number_list(item);
    if (v.size() != 3) throw ConfigError("points expect p,alpha,t triples separated by ';'");
    out.push_back({v[0], v[1], v[2]});
  }
  return out;
}

}  // namespace melnikov3d
