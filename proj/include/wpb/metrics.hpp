#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <vector>

#include "wpb/episode.hpp"
#include "wpb/memstore.hpp"

namespace wpb {

struct MetricsConfig {
  double epsilon = 1e-9;
  Bytes dp_budget_limit = 262'144;  // above this the greedy oracle runs

  void validate() const;
};

struct PrF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// precision = |W∩R|/(|W|+eps), recall = |W∩R|/(|R|+eps),
// f1 = 2PR/(P+R+eps).
PrF1 prf1(const std::set<std::size_t>& retained,
          const std::set<std::size_t>& relevant, double eps);

struct Diagnostics {
  double utilization = 0.0;
  double write_density = 0.0;
  double expire_rate = 0.0;
  double avg_staleness = 0.0;
  double drift_coverage = 0.0;
};

Diagnostics diagnostics(const MemoryState& state, const Episode& episode, double eps);

double utility_per_kb(double utility, Bytes bytes_used);

// Exact 0/1 knapsack by DP over byte capacity.
double knapsack_dp(std::span<const double> values, std::span<const Bytes> weights,
                   Bytes capacity);

// Value-density greedy (u/w descending, ties by index); skips items that do
// not fit and keeps scanning.
double knapsack_greedy(std::span<const double> values, std::span<const Bytes> weights,
                       Bytes capacity);

struct OracleResult {
  double value = 0.0;
  // True only when the greedy path ran and not every item fit, i.e. the
  // value may be below the true optimum.
  bool approximate = false;
};

// U*(B) under a WRITE-only action space: DP when B <= dp_budget_limit, else
// greedy. B >= sum(weights) short-circuits to sum(values).
// Throws std::invalid_argument on negative or mismatched inputs.
OracleResult oracle_write_only(std::span<const double> values,
                               std::span<const Bytes> weights, Bytes budget,
                               const MetricsConfig& cfg);

// Reusable oracle for one (episode, track): the DP table is built once up to
// min(sum(weights), dp_budget_limit) and answers every budget. Results are
// identical to oracle_write_only.
class WriteOnlyOracle {
 public:
  WriteOnlyOracle(std::vector<double> values, std::vector<Bytes> weights,
                  const MetricsConfig& cfg);

  OracleResult operator()(Bytes budget) const;

 private:
  std::vector<double> values_;
  std::vector<Bytes> weights_;
  MetricsConfig cfg_;
  Bytes total_weight_ = 0;
  double total_value_ = 0.0;
  std::vector<double> table_;
};

double regret_write_only(double oracle_utility, double retained_utility);

// Per-step WRITE costs as seen on `track` (the oracle's weights w_t).
std::vector<Bytes> oracle_weights(const Episode& episode, Track track);

struct EpisodeMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double utilization = 0.0;
  double write_density = 0.0;
  double expire_rate = 0.0;
  double avg_staleness = 0.0;
  double drift_coverage = 0.0;
  double retained_utility = 0.0;
  double utility_per_kb = 0.0;
  double oracle_utility = 0.0;
  double regret_write_only = 0.0;
  Bytes bytes_used = 0;
  Bytes budget_bytes = 0;
  std::size_t T = 0;
  bool oracle_approximate = false;
};

EpisodeMetrics score_episode(const MemoryState& state, const Episode& episode,
                             const OracleResult& oracle, const MetricsConfig& cfg);

}  // namespace wpb
