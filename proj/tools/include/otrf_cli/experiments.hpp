#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "otrf_cli/config.hpp"
#include "otrf_cli/report.hpp"

namespace otrf::cli {

struct RunContext {
  std::uint64_t seed = 0;
  int threads = 1;
};

struct RunResult {
  json summary = json::object();
  TrialTable trials{{}};
  std::vector<std::pair<std::string, std::string>> artifacts;  // file name, contents
};

/// Subcommand names, in help order.
const std::vector<std::string>& experiment_kinds();
std::string experiment_description(const std::string& kind);

/// Reads every setting from `cfg` (failing on unknown keys before any work
/// starts), then runs the benchmark. Trial t of group g always draws from
/// stream (seed, g, t), so outputs do not depend on ctx.threads.
RunResult run_experiment(const std::string& kind, Config& cfg, const RunContext& ctx);

}  // namespace otrf::cli
