#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "melnikov3d/field_models.hpp"
#include "melnikov3d/melnikov.hpp"

namespace melnikov3d {

/// Everything a CLI run depends on. Serialized in full into every output.
struct RunConfig {
  std::string command = "melnikov";
  std::string model = "hill-classical";
  ModelParams model_params;
  std::string perturbation = "gr";
  ModelParams perturbation_params;
  std::string chart;  ///< empty: the model's default chart
  double t = 0.0;
  std::vector<double> eps{0.1};
  double p_min = -2.0;
  double p_max = 2.0;
  std::size_t n_p = 200;
  std::size_t n_alpha = 192;
  QuadratureSpec quad;
  /// unstable | stable | heteroclinic | both; empty picks per command.
  std::string kind;
  /// Transversality threshold; negative means 1e-6 · max|∇M| over the grid.
  double grad_threshold = -1.0;
  bool refine_contours = false;
  /// Oracle tuples (p, α, t).
  std::vector<std::array<double, 3>> points;
  std::size_t random_points = 0;
  std::uint64_t seed = 1;
  double launch_depth = 6.0;
  double oracle_tol = 1e-12;
  /// Surface rows with |d| above this fraction of the distance to the
  /// saddle the approximation degrades near are flagged.
  double validity_fraction = 0.1;
  int threads = 0;
  std::string out_dir = ".";
  bool emit_plot_script = false;
};

/// Defaults for one subcommand (grid sizes differ for lobes, tuples for verify).
RunConfig default_config(const std::string& command);

nlohmann::json to_json(const RunConfig& cfg);
/// Overrides fields present in `j`; unknown keys are a ConfigError.
void merge_json(RunConfig& cfg, const nlohmann::json& j);
RunConfig load_config_file(const std::string& path, const std::string& command);

/// Resolves registry parameters and checks ranges. Throws ConfigError.
void validate(RunConfig& cfg);

/// "min:max:n".
void parse_p_range(const std::string& spec, RunConfig& cfg);
/// Comma separated list of numbers.
std::vector<double> parse_number_list(const std::string& spec);
/// "p,α,t;p,α,t;...".
std::vector<std::array<double, 3>> parse_points(const std::string& spec);

}  // namespace melnikov3d
