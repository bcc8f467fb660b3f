#include "wpb/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace wpb {

namespace {

void check_knapsack_inputs(std::span<const double> values,
                           std::span<const Bytes> weights) {
  if (values.size() != weights.size()) {
    throw std::invalid_argument("knapsack: values/weights length mismatch");
  }
  for (double v : values) {
    if (v < 0.0) throw std::invalid_argument("knapsack: negative value");
  }
  for (Bytes w : weights) {
    if (w < 0) throw std::invalid_argument("knapsack: negative weight");
  }
}

std::vector<double> knapsack_table(std::span<const double> values,
                                   std::span<const Bytes> weights, Bytes capacity) {
  std::vector<double> best(static_cast<std::size_t>(capacity) + 1, 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Bytes w = weights[i];
    const double v = values[i];
    if (w > capacity) continue;
    for (Bytes c = capacity; c >= w; --c) {
      best[c] = std::max(best[c], best[c - w] + v);
      if (c == 0) break;
    }
  }
  return best;
}

double sum_values(std::span<const double> values) {
  return std::accumulate(values.begin(), values.end(), 0.0);
}

Bytes sum_weights(std::span<const Bytes> weights) {
  return std::accumulate(weights.begin(), weights.end(), Bytes{0});
}

}  // namespace

void MetricsConfig::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (dp_budget_limit <= 0) throw std::invalid_argument("dp_budget_limit must be > 0");
}

PrF1 prf1(const std::set<std::size_t>& retained, const std::set<std::size_t>& relevant,
          double eps) {
  std::size_t hits = 0;
  for (auto t : retained) hits += relevant.count(t);
  PrF1 out;
  out.precision = static_cast<double>(hits) / (static_cast<double>(retained.size()) + eps);
  out.recall = static_cast<double>(hits) / (static_cast<double>(relevant.size()) + eps);
  out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall + eps);
  return out;
}

Diagnostics diagnostics(const MemoryState& state, const Episode& episode, double eps) {
  Diagnostics d;
  const std::size_t T = episode.steps.size();
  const auto retained = state.retained_timesteps();

  if (state.budget_bytes() > 0) {
    d.utilization = static_cast<double>(state.bytes_used()) /
                    static_cast<double>(state.budget_bytes());
  }
  if (T > 0) d.write_density = static_cast<double>(retained.size()) / static_cast<double>(T);

  const auto writes = state.accepted_count("WRITE");
  if (writes > 0) {
    d.expire_rate = static_cast<double>(state.accepted_count("EXPIRE")) /
                    static_cast<double>(writes);
  }

  const auto& items = state.items();
  if (!items.empty() && T > 0) {
    double total_age = 0.0;
    for (const auto& [id, item] : items) {
      total_age += static_cast<double>(T - 1) - static_cast<double>(item.timestep);
    }
    d.avg_staleness = total_age / static_cast<double>(items.size());
  }

  const std::set<std::size_t> relevant(episode.labels.critical_steps.begin(),
                                       episode.labels.critical_steps.end());
  std::size_t covered = 0;
  for (auto t : relevant) covered += retained.count(t);
  d.drift_coverage =
      static_cast<double>(covered) / (static_cast<double>(relevant.size()) + eps);
  return d;
}

double utility_per_kb(double utility, Bytes bytes_used) {
  if (bytes_used <= 0) return 0.0;
  return utility / (static_cast<double>(bytes_used) / 1024.0);
}

double knapsack_dp(std::span<const double> values, std::span<const Bytes> weights,
                   Bytes capacity) {
  check_knapsack_inputs(values, weights);
  if (capacity < 0) return 0.0;
  return knapsack_table(values, weights, capacity).back();
}

double knapsack_greedy(std::span<const double> values, std::span<const Bytes> weights,
                       Bytes capacity) {
  check_knapsack_inputs(values, weights);
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Density comparison by cross-multiplication; zero-weight items sort first.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] * static_cast<double>(weights[b]) >
           values[b] * static_cast<double>(weights[a]);
  });
  double total = 0.0;
  Bytes free = capacity;
  for (auto i : order) {
    if (weights[i] <= free) {
      free -= weights[i];
      total += values[i];
    }
  }
  return total;
}

OracleResult oracle_write_only(std::span<const double> values,
                               std::span<const Bytes> weights, Bytes budget,
                               const MetricsConfig& cfg) {
  check_knapsack_inputs(values, weights);
  if (budget >= sum_weights(weights)) return {sum_values(values), false};
  if (budget <= cfg.dp_budget_limit) return {knapsack_dp(values, weights, budget), false};
  return {knapsack_greedy(values, weights, budget), true};
}

WriteOnlyOracle::WriteOnlyOracle(std::vector<double> values, std::vector<Bytes> weights,
                                 const MetricsConfig& cfg)
    : values_(std::move(values)), weights_(std::move(weights)), cfg_(cfg) {
  check_knapsack_inputs(values_, weights_);
  total_weight_ = sum_weights(weights_);
  total_value_ = sum_values(values_);
  table_ = knapsack_table(values_, weights_, std::min(total_weight_, cfg_.dp_budget_limit));
}

OracleResult WriteOnlyOracle::operator()(Bytes budget) const {
  if (budget >= total_weight_) return {total_value_, false};
  if (budget < 0) return {0.0, false};
  if (budget <= cfg_.dp_budget_limit) return {table_[static_cast<std::size_t>(budget)], false};
  return {knapsack_greedy(values_, weights_, budget), true};
}

double regret_write_only(double oracle_utility, double retained_utility) {
  return std::max(0.0, oracle_utility - retained_utility);
}

std::vector<Bytes> oracle_weights(const Episode& episode, Track track) {
  std::vector<Bytes> weights;
  weights.reserve(episode.steps.size());
  for (std::size_t t = 0; t < episode.steps.size(); ++t) {
    weights.push_back(estimate_bytes(observed_step(episode, t, track)));
  }
  return weights;
}

EpisodeMetrics score_episode(const MemoryState& state, const Episode& episode,
                             const OracleResult& oracle, const MetricsConfig& cfg) {
  EpisodeMetrics m;
  const auto retained = state.retained_timesteps();
  const std::set<std::size_t> relevant(episode.labels.critical_steps.begin(),
                                       episode.labels.critical_steps.end());

  const PrF1 quality = prf1(retained, relevant, cfg.epsilon);
  m.precision = quality.precision;
  m.recall = quality.recall;
  m.f1 = quality.f1;

  const Diagnostics d = diagnostics(state, episode, cfg.epsilon);
  m.utilization = d.utilization;
  m.write_density = d.write_density;
  m.expire_rate = d.expire_rate;
  m.avg_staleness = d.avg_staleness;
  m.drift_coverage = d.drift_coverage;

  for (auto t : retained) m.retained_utility += episode.labels.utility.at(t);
  m.utility_per_kb = utility_per_kb(m.retained_utility, state.bytes_used());
  m.oracle_utility = oracle.value;
  m.oracle_approximate = oracle.approximate;
  m.regret_write_only = regret_write_only(oracle.value, m.retained_utility);

  m.bytes_used = state.bytes_used();
  m.budget_bytes = state.budget_bytes();
  m.T = episode.steps.size();
  return m;
}

}  // namespace wpb
