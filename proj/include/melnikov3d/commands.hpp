#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "melnikov3d/run_config.hpp"

namespace melnikov3d {

struct CommandResult {
  std::vector<std::string> files;
  /// Machine-readable summary; also written as <command>.json.
  nlohmann::json summary;
};

/// Validates `cfg` and dispatches on cfg.command. Progress and a short
/// human-readable summary go to `log`.
CommandResult run_command(RunConfig cfg, std::ostream& log);

CommandResult cmd_models(const RunConfig& cfg, std::ostream& log);
CommandResult cmd_chart(const RunConfig& cfg, std::ostream& log);
CommandResult cmd_melnikov(const RunConfig& cfg, std::ostream& log);
CommandResult cmd_surface(const RunConfig& cfg, std::ostream& log);
CommandResult cmd_contours(const RunConfig& cfg, std::ostream& log);
CommandResult cmd_lobes(const RunConfig& cfg, std::ostream& log);
CommandResult cmd_verify(const RunConfig& cfg, std::ostream& log);

}  // namespace melnikov3d
