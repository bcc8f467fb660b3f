// wpb: command-line front end for the write-policy benchmark.
//
//   wpb freeze    --regime default --episodes 10 --seed 0 --out episodes.jsonl
//   wpb evaluate  --episodes episodes.jsonl --out-dir out/
//   wpb aggregate --in out/results.jsonl --out out/aggregate.csv
//   wpb selftest

#include <algorithm>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wpb/episode_io.hpp"
#include "wpb/results.hpp"
#include "wpb/runner.hpp"
#include "wpb/selftest.hpp"

namespace {

std::vector<wpb::Regime> parse_regimes(const std::vector<std::string>& names) {
  if (names.empty() || (names.size() == 1 && names[0] == "all")) return wpb::all_regimes();
  std::vector<wpb::Regime> out;
  for (const auto& n : names) {
    auto r = wpb::parse_regime(n);
    if (!r) throw wpb::ConfigError("unknown regime '" + n + "'");
    out.push_back(*r);
  }
  return out;
}

std::vector<wpb::Track> parse_tracks(const std::vector<std::string>& names) {
  std::vector<wpb::Track> out;
  for (const auto& n : names) {
    auto t = wpb::parse_track(n);
    if (!t) throw wpb::ConfigError("unknown track '" + n + "'");
    out.push_back(*t);
  }
  return out;
}

int cmd_freeze(const std::vector<std::string>& regimes, std::size_t count,
               std::uint64_t seed, const std::string& out) {
  std::vector<wpb::Episode> episodes;
  for (auto r : parse_regimes(regimes)) {
    auto set = wpb::generate_episode_set(wpb::GeneratorConfig{}, r, count, seed);
    episodes.insert(episodes.end(), set.begin(), set.end());
  }
  wpb::freeze_episodes(episodes, out);
  std::cout << "froze " << episodes.size() << " episodes to " << out << '\n';
  return 0;
}

int cmd_aggregate(const std::string& in_path, const std::string& out_path) {
  std::ifstream in(in_path);
  if (!in) {
    std::cerr << "error: cannot open " << in_path << '\n';
    return 1;
  }
  const auto rows = wpb::read_results(in);
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) {
    std::cerr << "error: cannot write " << out_path << '\n';
    return 1;
  }
  const auto agg = wpb::aggregate(rows);
  wpb::write_aggregate_csv(out, agg);
  std::cout << "aggregated " << rows.size() << " rows into " << agg.size()
            << " conditions\n";
  return 0;
}

int cmd_selftest() {
  int failures = 0;
  for (const auto& c : wpb::run_selftest()) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name;
    if (!c.detail.empty()) std::cout << " (" << c.detail << ")";
    std::cout << '\n';
    if (!c.passed) ++failures;
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark harness for memory write policies under a byte budget"};
  app.require_subcommand(1);

  auto* freeze = app.add_subcommand("freeze", "Generate episodes and freeze them to disk");
  std::vector<std::string> freeze_regimes{"default"};
  std::size_t freeze_count = 10;
  std::uint64_t freeze_seed = 0;
  std::string freeze_out;
  freeze->add_option("--regime", freeze_regimes, "Regime name(s), comma-separated, or 'all'")
      ->delimiter(',');
  freeze->add_option("--episodes", freeze_count, "Episodes per regime")->capture_default_str();
  freeze->add_option("--seed", freeze_seed, "Base seed; episode i uses seed+i")
      ->capture_default_str();
  freeze->add_option("--out", freeze_out, "Output file")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Run the policy sweep");
  std::string episodes_src = "auto";
  std::vector<std::string> regimes;
  std::vector<std::string> tracks{"unprivileged", "privileged"};
  std::vector<wpb::Bytes> budgets = wpb::kDefaultBudgets;
  std::vector<std::string> policies = wpb::policy_names();
  std::string out_dir;
  wpb::SweepConfig sweep;
  evaluate->add_option("--episodes", episodes_src, "Frozen episode file, or 'auto'")
      ->capture_default_str();
  evaluate->add_option("--regimes", regimes, "Regimes (default: all)")->delimiter(',');
  evaluate->add_option("--tracks", tracks, "Tracks")->delimiter(',')->capture_default_str();
  evaluate->add_option("--budgets", budgets, "Byte budgets")->delimiter(',')->capture_default_str();
  evaluate->add_option("--policies", policies, "Policy names")->delimiter(',')->capture_default_str();
  evaluate->add_option("--num-episodes", sweep.episodes_per_condition,
                       "Episodes per condition when --episodes=auto")
      ->capture_default_str();
  evaluate->add_option("--seed", sweep.base_seed, "Base seed when --episodes=auto")
      ->capture_default_str();
  evaluate->add_option("--out-dir", out_dir, "Output directory")->required();

  auto* agg = app.add_subcommand("aggregate", "Aggregate per-episode results into a CSV");
  std::string agg_in;
  std::string agg_out;
  agg->add_option("--in", agg_in, "Per-episode results (JSONL)")->required();
  agg->add_option("--out", agg_out, "Aggregate CSV")->required();

  auto* selftest = app.add_subcommand("selftest", "Run the invariant self-test suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*freeze) return cmd_freeze(freeze_regimes, freeze_count, freeze_seed, freeze_out);
    if (*evaluate) {
      if (episodes_src != "auto") sweep.episode_file = episodes_src;
      if (!regimes.empty() || !sweep.episode_file) {
        sweep.regimes = parse_regimes(regimes);
      } else {
        // Default to every regime present in the frozen file.
        sweep.regimes.clear();
        for (const auto& ep : wpb::load_episodes(*sweep.episode_file)) {
          if (std::find(sweep.regimes.begin(), sweep.regimes.end(), ep.config.regime) ==
              sweep.regimes.end()) {
            sweep.regimes.push_back(ep.config.regime);
          }
        }
      }
      sweep.tracks = parse_tracks(tracks);
      sweep.budgets = budgets;
      sweep.policies = policies;
      const auto files = wpb::run_sweep_to_dir(sweep, out_dir);
      std::cout << "wrote " << files.results.string() << " and " << files.aggregate.string()
                << '\n';
      return 0;
    }
    if (*agg) return cmd_aggregate(agg_in, agg_out);
    if (*selftest) return cmd_selftest();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
