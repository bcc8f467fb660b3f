#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wpb/episode.hpp"
#include "wpb/memstore.hpp"
#include "wpb/metrics.hpp"
#include "wpb/policies.hpp"
#include "wpb/results.hpp"

namespace wpb {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline const std::vector<Bytes> kDefaultBudgets{1024, 10240, 102400, 1048576};

struct SweepConfig {
  std::vector<Regime> regimes = all_regimes();
  std::vector<Track> tracks{Track::kUnprivileged, Track::kPrivileged};
  std::vector<Bytes> budgets = kDefaultBudgets;
  std::vector<std::string> policies = policy_names();
  std::size_t episodes_per_condition = 10;
  std::uint64_t base_seed = 0;
  GeneratorConfig generator;
  PolicyParams policy_params;
  MetricsConfig metrics;
  // When set, episodes come from this frozen file (all episodes of each
  // requested regime, in file order) instead of being generated.
  std::optional<std::filesystem::path> episode_file;

  // Throws ConfigError.
  void validate() const;
};

// Policies scheduled on `track`: the privileged track runs every listed
// policy, the unprivileged track only the unprivileged ones.
std::vector<std::string> scheduled_policies(const SweepConfig& cfg, Track track);

struct RunOutcome {
  MemoryState state;
  EpisodeMetrics metrics;
};

// Single sequential pass over the stream. Throws ConfigError before the first
// step if a privileged policy is run on the unprivileged track; any exception
// raised by the policy propagates.
RunOutcome run_episode(const Episode& episode, Policy& policy, Bytes budget,
                       Track track, const MetricsConfig& cfg,
                       const WriteOnlyOracle* oracle = nullptr);

using EpisodeSet = std::map<Regime, std::vector<Episode>>;

// Generates or loads the episodes the sweep will run.
EpisodeSet prepare_episodes(const SweepConfig& cfg);

using PolicyFactory =
    std::function<std::unique_ptr<Policy>(std::string_view, const PolicyParams&)>;

// Every (regime, track, budget, policy, episode) row, sorted by condition key
// then episode index. Policy failures become error rows.
std::vector<ResultRow> run_sweep(const SweepConfig& cfg, const EpisodeSet& episodes,
                                 const PolicyFactory& factory = make_policy);

struct SweepFiles {
  std::filesystem::path results;    // per-episode JSONL
  std::filesystem::path aggregate;  // CSV
};

// Runs the sweep and writes results.jsonl + aggregate.csv into output_dir.
SweepFiles run_sweep_to_dir(const SweepConfig& cfg,
                            const std::filesystem::path& output_dir);

}  // namespace wpb
