#pragma once

#include <ostream>
#include <string>

#include "cli/config.hpp"

namespace coalsisr::cli {

struct CommandOptions {
  /// estimate: also write per-coalescence SIS weight trajectories.
  bool trajectory = false;
  bool quiet = false;
};

/// Runs "simulate", "estimate", "infer" or "experiment". Results go to
/// cfg.out with a manifest; a summary goes to `out`, progress to `err`.
/// Library errors propagate as exceptions.
int run_command(const std::string& command, const RunConfig& cfg, const CommandOptions& opt, std::ostream& out,
                std::ostream& err);

}  // namespace coalsisr::cli
