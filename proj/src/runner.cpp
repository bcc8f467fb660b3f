#include "wpb/runner.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "wpb/episode_io.hpp"

namespace wpb {

void SweepConfig::validate() const {
  if (regimes.empty()) throw ConfigError("no regimes selected");
  if (tracks.empty()) throw ConfigError("no tracks selected");
  if (budgets.empty()) throw ConfigError("no budgets selected");
  if (policies.empty()) throw ConfigError("no policies selected");
  for (Bytes b : budgets) {
    if (b <= 0) throw ConfigError("budgets must be > 0");
  }
  if (!episode_file && episodes_per_condition < 1) {
    throw ConfigError("episodes_per_condition must be >= 1");
  }
  const bool privileged_track =
      std::find(tracks.begin(), tracks.end(), Track::kPrivileged) != tracks.end();
  for (const auto& name : policies) {
    if (!is_known_policy(name)) throw ConfigError("unknown policy '" + name + "'");
    if (is_privileged_policy(name) && !privileged_track) {
      throw ConfigError("policy '" + name +
                        "' needs the privileged track but only the unprivileged "
                        "track is selected");
    }
  }
  try {
    generator.validate();
    policy_params.validate();
    metrics.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::vector<std::string> scheduled_policies(const SweepConfig& cfg, Track track) {
  std::vector<std::string> out;
  for (const auto& name : cfg.policies) {
    if (track == Track::kPrivileged || !is_privileged_policy(name)) out.push_back(name);
  }
  return out;
}

RunOutcome run_episode(const Episode& episode, Policy& policy, Bytes budget,
                       Track track, const MetricsConfig& cfg,
                       const WriteOnlyOracle* oracle) {
  if (policy.privileged() && track != Track::kPrivileged) {
    throw ConfigError("policy '" + std::string(policy.name()) +
                      "' cannot run on the unprivileged track");
  }
  MemoryState state(budget);
  for (std::size_t t = 0; t < episode.steps.size(); ++t) {
    const Step step = observed_step(episode, t, track);
    const std::vector<Action> actions = policy.decide(PolicyView{t, step, state});
    for (const auto& action : actions) state.apply_action(step, action);
  }

  OracleResult best;
  if (oracle) {
    best = (*oracle)(budget);
  } else {
    best = oracle_write_only(episode.labels.utility, oracle_weights(episode, track),
                             budget, cfg);
  }
  EpisodeMetrics metrics = score_episode(state, episode, best, cfg);
  return RunOutcome{std::move(state), metrics};
}

EpisodeSet prepare_episodes(const SweepConfig& cfg) {
  EpisodeSet out;
  if (!cfg.episode_file) {
    for (Regime r : cfg.regimes) {
      out[r] = generate_episode_set(cfg.generator, r, cfg.episodes_per_condition,
                                    cfg.base_seed);
    }
    return out;
  }

  for (auto& ep : load_episodes(*cfg.episode_file)) {
    out[ep.config.regime].push_back(std::move(ep));
  }
  for (Regime r : cfg.regimes) {
    if (out.find(r) == out.end()) {
      throw ConfigError("episode file has no episodes for regime '" +
                        std::string(regime_name(r)) + "'");
    }
  }
  std::erase_if(out, [&](const auto& kv) {
    return std::find(cfg.regimes.begin(), cfg.regimes.end(), kv.first) ==
           cfg.regimes.end();
  });
  return out;
}

std::vector<ResultRow> run_sweep(const SweepConfig& cfg, const EpisodeSet& episodes,
                                 const PolicyFactory& factory) {
  cfg.validate();
  std::vector<ResultRow> rows;
  for (Regime regime : cfg.regimes) {
    const auto& eps = episodes.at(regime);
    for (Track track : cfg.tracks) {
      const auto policies = scheduled_policies(cfg, track);
      for (std::size_t i = 0; i < eps.size(); ++i) {
        const Episode& episode = eps[i];
        const WriteOnlyOracle oracle(episode.labels.utility,
                                     oracle_weights(episode, track), cfg.metrics);
        for (Bytes budget : cfg.budgets) {
          for (const auto& name : policies) {
            ResultRow row{{std::string(regime_name(regime)), std::string(track_name(track)),
                           budget, name},
                          i, std::nullopt, {}};
            try {
              auto policy = factory(name, cfg.policy_params);
              row.metrics = run_episode(episode, *policy, budget, track, cfg.metrics,
                                        &oracle)
                                .metrics;
            } catch (const std::exception& e) {
              row.error = e.what();
            }
            rows.push_back(std::move(row));
          }
        }
      }
    }
  }
  std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.key, a.episode_index) < std::tie(b.key, b.episode_index);
  });
  return rows;
}

SweepFiles run_sweep_to_dir(const SweepConfig& cfg,
                            const std::filesystem::path& output_dir) {
  cfg.validate();
  std::error_code ec;
  std::filesystem::create_directories(output_dir, ec);
  if (ec) {
    throw ConfigError("cannot create output dir " + output_dir.string() + ": " +
                      ec.message());
  }
  const auto rows = run_sweep(cfg, prepare_episodes(cfg));

  SweepFiles files{output_dir / "results.jsonl", output_dir / "aggregate.csv"};
  std::ofstream results(files.results, std::ios::binary | std::ios::trunc);
  std::ofstream csv(files.aggregate, std::ios::binary | std::ios::trunc);
  if (!results || !csv) {
    throw ConfigError("output dir " + output_dir.string() + " is not writable");
  }
  // Aggregate from the rendered lines so the CSV is a pure function of the
  // results file (`wpb aggregate` reproduces it byte for byte).
  std::ostringstream rendered;
  write_results(rendered, rows);
  results << rendered.str();
  std::istringstream reread(rendered.str());
  write_aggregate_csv(csv, aggregate(read_results(reread)));
  return files;
}

}  // namespace wpb
