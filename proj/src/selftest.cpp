#include "wpb/selftest.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "wpb/episode_io.hpp"
#include "wpb/rng.hpp"
#include "wpb/runner.hpp"

namespace wpb {

namespace {

constexpr Bytes kSaturatingBudget = 1'048'576;
constexpr Bytes kLowBudget = 10'240;

SelfTestCheck check(std::string name, bool ok, std::string detail = {}) {
  return SelfTestCheck{std::move(name), ok, std::move(detail)};
}

RunOutcome run(const Episode& ep, std::string_view policy, Bytes budget, Track track) {
  auto p = make_policy(policy);
  return run_episode(ep, *p, budget, track, MetricsConfig{});
}

Bytes live_sum(const MemoryState& state) {
  Bytes sum = 0;
  for (const auto& [id, item] : state.items()) sum += item.charged_bytes;
  return sum;
}

SelfTestCheck no_memory_is_empty(const std::vector<Episode>& episodes) {
  for (const auto& ep : episodes) {
    for (Bytes b : kDefaultBudgets) {
      const auto out = run(ep, "no_mem", b, Track::kPrivileged);
      const auto& m = out.metrics;
      if (m.bytes_used != 0 || m.write_density != 0.0 || m.drift_coverage != 0.0 ||
          m.f1 != 0.0) {
        return check("no_mem yields zero density and coverage", false,
                     "regime " + std::string(regime_name(ep.config.regime)));
      }
    }
  }
  return check("no_mem yields zero density and coverage", true);
}

SelfTestCheck write_all_saturates(const std::vector<Episode>& episodes) {
  for (const auto& ep : episodes) {
    const auto out = run(ep, "fifo_store_all", kSaturatingBudget, Track::kPrivileged);
    if (out.state.retained_timesteps().size() != ep.steps.size() ||
        std::abs(out.metrics.recall - 1.0) > 1e-6) {
      return check("fifo_store_all saturates at large budget", false,
                   "seed " + std::to_string(ep.config.seed));
    }
  }
  return check("fifo_store_all saturates at large budget", true);
}

SelfTestCheck staleness_and_utilization(const std::vector<Episode>& episodes) {
  double fifo = 0.0;
  double last = 0.0;
  for (const auto& ep : episodes) {
    const auto f = run(ep, "fifo_store_all", kLowBudget, Track::kPrivileged);
    const auto l = run(ep, "last_kb", kLowBudget, Track::kPrivileged);
    for (const auto* m : {&f.metrics, &l.metrics}) {
      if (m->utilization < 0.0 || m->utilization > 1.0) {
        return check("staleness and utilization behave", false, "utilization out of [0,1]");
      }
    }
    fifo += f.metrics.avg_staleness;
    last += l.metrics.avg_staleness;
  }
  std::ostringstream detail;
  detail << "mean staleness last_kb=" << last / episodes.size()
         << " fifo_store_all=" << fifo / episodes.size();
  return check("staleness and utilization behave", last < fifo, detail.str());
}

SelfTestCheck full_memory_staleness() {
  GeneratorConfig cfg;
  const Episode ep = generate_episode(cfg);
  const auto out = run(ep, "fifo_store_all", kSaturatingBudget, Track::kUnprivileged);
  const double expected = (static_cast<double>(cfg.num_steps) - 1.0) / 2.0;
  return check("staleness of a full memory is (T-1)/2",
               std::abs(out.metrics.avg_staleness - expected) < 1e-12);
}

SelfTestCheck budget_fuzz(std::size_t sequences) {
  Xoshiro256 rng(12345);
  GeneratorConfig gen;
  gen.num_steps = 40;
  gen.regime = Regime::kRedundancy;
  for (std::size_t s = 0; s < sequences; ++s) {
    gen.seed = s;
    const Episode ep = generate_episode(gen);
    MemoryState state(static_cast<Bytes>(rng.uniform_index(4096)));
    for (const auto& step : ep.steps) {
      for (int k = 0; k < 3; ++k) {
        const ItemId target = rng.uniform_index(state.items().size() + 3);
        Action action;
        switch (rng.uniform_index(4)) {
          case 0: action = WriteAction{step}; break;
          case 1: action = ExpireAction{target}; break;
          case 2: {
            ObservationDelta delta;
            delta.version = step.observation.version;
            action = MergeAction{target, delta};
            break;
          }
          default: action = SkipAction{}; break;
        }
        state.apply_action(step, action);
        if (state.bytes_used() > state.budget_bytes() || state.bytes_used() != live_sum(state)) {
          return check("budget accounting under random actions", false,
                       "sequence " + std::to_string(s));
        }
      }
    }
  }
  return check("budget accounting under random actions", true,
               std::to_string(sequences) + " sequences");
}

SelfTestCheck expire_credit() {
  GeneratorConfig gen;
  gen.num_steps = 5;
  const Episode ep = generate_episode(gen);
  MemoryState state(100'000);
  state.apply_action(ep.steps[3], WriteAction{ep.steps[3]});
  const Bytes before = 0;
  const ItemId id = state.items().begin()->first;
  state.apply_action(ep.steps[4], ExpireAction{id});
  return check("EXPIRE credits the original charge", state.bytes_used() == before);
}

}  // namespace

std::vector<SelfTestCheck> run_selftest() {
  std::vector<Episode> episodes;
  for (Regime r : all_regimes()) {
    auto set = generate_episode_set(GeneratorConfig{}, r, 3, 0);
    episodes.insert(episodes.end(), set.begin(), set.end());
  }
  return {
      no_memory_is_empty(episodes),
      write_all_saturates(episodes),
      staleness_and_utilization(episodes),
      full_memory_staleness(),
      budget_fuzz(200),
      expire_credit(),
  };
}

}  // namespace wpb
