#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "wpb/episode_io.hpp"
#include "wpb/results.hpp"
#include "wpb/runner.hpp"

using namespace wpb;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("wpb_runner_" + name);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Records every step it sees; writes nothing.
class ProbePolicy final : public Policy {
 public:
  std::string_view name() const override { return "probe"; }
  std::vector<Action> decide(const PolicyView& view) override {
    seen.push_back(view.t);
    has_priority.push_back(view.step.metadata.priority.has_value());
    return {SkipAction{}};
  }
  std::vector<std::size_t> seen;
  std::vector<bool> has_priority;
};

class ThrowingPolicy final : public Policy {
 public:
  std::string_view name() const override { return "last_kb"; }
  std::vector<Action> decide(const PolicyView& view) override {
    if (view.t == 3) throw std::runtime_error("boom");
    return {SkipAction{}};
  }
};

ResultRow row_with_f1(double f1, std::size_t index) {
  ResultRow r;
  r.key = {"default", "privileged", 1024, "fifo_store_all"};
  r.episode_index = index;
  EpisodeMetrics m;
  m.f1 = f1;
  m.T = 200;
  m.budget_bytes = 1024;
  r.metrics = m;
  return r;
}

}  // namespace

TEST_CASE("run_episode basics") {
  const auto episodes = generate_episode_set(GeneratorConfig{}, Regime::kDefault, 2, 0);
  const MetricsConfig cfg;

  SUBCASE("no_mem scores zero") {
    auto p = make_policy("no_mem");
    const auto out = run_episode(episodes[0], *p, 10'240, Track::kUnprivileged, cfg);
    CHECK(out.metrics.f1 == 0.0);
    CHECK(out.metrics.bytes_used == 0);
    CHECK(out.metrics.retained_utility == 0.0);
    CHECK(out.metrics.utility_per_kb == 0.0);
    CHECK(out.metrics.T == 200);
    CHECK(out.metrics.budget_bytes == 10'240);
  }
  SUBCASE("fifo at a saturating budget keeps everything") {
    const auto& ep = episodes[1];
    auto p = make_policy("fifo_store_all");
    const auto out = run_episode(ep, *p, 1'048'576, Track::kPrivileged, cfg);
    const double prevalence =
        static_cast<double>(ep.labels.critical_steps.size()) / static_cast<double>(ep.steps.size());
    CHECK(out.metrics.recall == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(out.metrics.f1 - 2 * prevalence / (1 + prevalence)) < 1e-8);
    CHECK(out.metrics.regret_write_only == 0.0);
    CHECK_FALSE(out.metrics.oracle_approximate);
  }
  SUBCASE("empty episode") {
    GeneratorConfig g;
    g.num_steps = 0;
    const Episode ep = generate_episode(g);
    auto p = make_policy("fifo_store_all");
    const auto out = run_episode(ep, *p, 1024, Track::kPrivileged, cfg);
    CHECK(out.metrics.T == 0);
    CHECK(out.metrics.f1 == 0.0);
    CHECK(out.state.log().empty());
  }
}

TEST_CASE("one sequential pass, priority only on the privileged track") {
  const Episode ep = generate_episode(GeneratorConfig{});
  for (Track track : {Track::kUnprivileged, Track::kPrivileged}) {
    ProbePolicy probe;
    run_episode(ep, probe, 1024, track, MetricsConfig{});
    REQUIRE(probe.seen.size() == ep.steps.size());
    for (std::size_t t = 0; t < probe.seen.size(); ++t) {
      CHECK(probe.seen[t] == t);
      CHECK(probe.has_priority[t] == (track == Track::kPrivileged));
    }
  }
}

TEST_CASE("privileged policy on the unprivileged track is a config error") {
  const Episode ep = generate_episode(GeneratorConfig{});
  auto p = make_policy("priority_threshold");
  CHECK_THROWS_AS(run_episode(ep, *p, 1024, Track::kUnprivileged, MetricsConfig{}), ConfigError);

  SweepConfig cfg;
  cfg.tracks = {Track::kUnprivileged};
  cfg.policies = {"fifo_store_all", "priority_greedy"};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.policies = {"fifo_store_all"};
  CHECK_NOTHROW(cfg.validate());
  cfg.budgets = {0};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("track scheduling") {
  SweepConfig cfg;
  const auto unpriv = scheduled_policies(cfg, Track::kUnprivileged);
  const auto priv = scheduled_policies(cfg, Track::kPrivileged);
  CHECK(unpriv.size() == 5);
  CHECK(priv.size() == 7);
  for (const auto& name : unpriv) CHECK_FALSE(is_privileged_policy(name));
}

TEST_CASE("stream isolation: policies never mutate the episode") {
  const auto episodes = generate_episode_set(GeneratorConfig{}, Regime::kBurstRedundancy, 1, 3);
  const std::string before = serialize_episodes(episodes);
  for (const auto& name : policy_names()) {
    auto p = make_policy(name);
    run_episode(episodes[0], *p, 10'240, Track::kPrivileged, MetricsConfig{});
  }
  CHECK(serialize_episodes(episodes) == before);
}

TEST_CASE("failure isolation: a throwing policy yields error rows only") {
  SweepConfig cfg;
  cfg.regimes = {Regime::kDefault};
  cfg.tracks = {Track::kUnprivileged};
  cfg.budgets = {1024};
  cfg.policies = {"fifo_store_all", "last_kb"};
  cfg.episodes_per_condition = 2;
  const auto episodes = prepare_episodes(cfg);

  PolicyFactory factory = [](std::string_view name, const PolicyParams& params)
      -> std::unique_ptr<Policy> {
    if (name == "last_kb") return std::make_unique<ThrowingPolicy>();
    return make_policy(name, params);
  };
  const auto rows = run_sweep(cfg, episodes, factory);
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) {
    if (r.key.policy == "last_kb") {
      CHECK_FALSE(r.metrics);
      CHECK(r.error.find("boom") != std::string::npos);
    } else {
      CHECK(r.metrics);
      CHECK(r.error.empty());
    }
  }
  const auto agg = aggregate(rows);
  REQUIRE(agg.size() == 1);
  CHECK(agg[0].key.policy == "fifo_store_all");
}

TEST_CASE("result lines round trip") {
  ResultRow r = row_with_f1(0.25, 4);
  r.metrics->oracle_approximate = true;
  const std::string line = format_result_line(r);
  CHECK(line.find(R"("f1":0.250000)") != std::string::npos);
  const ResultRow back = parse_result_line(line);
  CHECK(back.key == r.key);
  CHECK(back.episode_index == 4);
  REQUIRE(back.metrics);
  CHECK(back.metrics->f1 == 0.25);
  CHECK(back.metrics->oracle_approximate);
  CHECK(format_result_line(back) == line);

  ResultRow err;
  err.key = r.key;
  err.error = "bad";
  const ResultRow err_back = parse_result_line(format_result_line(err));
  CHECK_FALSE(err_back.metrics);
  CHECK(err_back.error == "bad");

  CHECK_THROWS_AS(parse_result_line("{not json"), std::invalid_argument);
  CHECK(format_fixed6(1.0 / 3.0) == "0.333333");
}

TEST_CASE("aggregate examples") {
  SUBCASE("identical rows have zero standard error") {
    const auto agg = aggregate({row_with_f1(0.4, 0), row_with_f1(0.4, 1), row_with_f1(0.4, 2)});
    REQUIRE(agg.size() == 1);
    CHECK(agg[0].metric("f1").mean == doctest::Approx(0.4));
    CHECK(agg[0].metric("f1").se == 0.0);
    CHECK(agg[0].episodes == 3);
  }
  SUBCASE("two rows at 0 and 1") {
    const auto agg = aggregate({row_with_f1(0.0, 0), row_with_f1(1.0, 1)});
    REQUIRE(agg.size() == 1);
    CHECK(agg[0].metric("f1").mean == 0.5);
    CHECK(agg[0].metric("f1").se == doctest::Approx(0.5));
  }
  SUBCASE("single row reports SE 0") {
    const auto agg = aggregate({row_with_f1(0.7, 0)});
    REQUIRE(agg.size() == 1);
    CHECK(agg[0].metric("f1").se == 0.0);
  }
  SUBCASE("missing conditions produce no rows") {
    CHECK(aggregate({}).empty());
  }
  SUBCASE("csv header") {
    std::ostringstream out;
    write_aggregate_csv(out, aggregate({row_with_f1(0.5, 0)}));
    const std::string csv = out.str();
    const std::string header = csv.substr(0, csv.find('\n'));
    CHECK(header.rfind("regime,track,budget,policy,precision_mean,precision_se,recall_mean", 0) == 0);
    CHECK(header.size() > 8);
    CHECK(header.substr(header.size() - 9) == ",episodes");
    CHECK(header.find("f1_mean,f1_se") != std::string::npos);
    CHECK(header.find("regret_write_only_mean") != std::string::npos);
  }
}

TEST_CASE("default sweep shape") {
  SweepConfig cfg;
  cfg.episodes_per_condition = 1;
  const auto rows = run_sweep(cfg, prepare_episodes(cfg));
  // 4 regimes x 4 budgets x (5 unprivileged + 7 privileged) policies.
  CHECK(rows.size() == 4 * 4 * 12);
  for (const auto& r : rows) CHECK(r.metrics);
  const auto agg = aggregate(rows);
  CHECK(agg.size() == rows.size());
  for (const auto& a : agg) {
    CHECK(a.episodes == 1);
    for (const auto& m : a.metrics) CHECK(m.se == 0.0);
  }
}

TEST_CASE("sweeps over a frozen file are byte-identical") {
  const auto file = temp_path("frozen.jsonl");
  freeze_episodes(generate_episode_set(GeneratorConfig{}, Regime::kBurstDrift, 2, 11), file);

  SweepConfig cfg;
  cfg.regimes = {Regime::kBurstDrift};
  cfg.budgets = {1024, 102400};
  cfg.episode_file = file;
  const auto a = run_sweep_to_dir(cfg, temp_path("out_a"));
  const auto b = run_sweep_to_dir(cfg, temp_path("out_b"));
  CHECK(slurp(a.results) == slurp(b.results));
  CHECK(slurp(a.aggregate) == slurp(b.aggregate));
  CHECK_FALSE(slurp(a.results).empty());

  // Re-aggregating the written results reproduces the CSV.
  std::ifstream in(a.results);
  std::ostringstream csv;
  write_aggregate_csv(csv, aggregate(read_results(in)));
  CHECK(csv.str() == slurp(a.aggregate));

  std::filesystem::remove(file);
  std::filesystem::remove_all(temp_path("out_a"));
  std::filesystem::remove_all(temp_path("out_b"));
}
