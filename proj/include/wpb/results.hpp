#pragma once

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wpb/metrics.hpp"

namespace wpb {

struct ConditionKey {
  std::string regime;
  std::string track;
  Bytes budget = 0;
  std::string policy;

  auto operator<=>(const ConditionKey&) const = default;
  bool operator==(const ConditionKey&) const = default;
};

// One (condition, episode) run. Failed runs carry `error` and no metrics.
struct ResultRow {
  ConditionKey key;
  std::size_t episode_index = 0;
  std::optional<EpisodeMetrics> metrics;
  std::string error;
};

struct MetricField {
  std::string_view name;
  double (*get)(const EpisodeMetrics&);
};

// Every scalar EpisodeMetrics field, in declaration order.
const std::vector<MetricField>& metric_fields();

// Fixed 6-decimal rendering used by every output file.
std::string format_fixed6(double value);

// Canonical-JSON line: sorted keys, no whitespace, reals as fixed 6 decimals.
std::string format_result_line(const ResultRow& row);
// Throws std::invalid_argument on a malformed line.
ResultRow parse_result_line(std::string_view line);

std::vector<ResultRow> read_results(std::istream& in);
void write_results(std::ostream& out, const std::vector<ResultRow>& rows);

struct MetricSummary {
  double mean = 0.0;
  double se = 0.0;
};

struct AggregateRow {
  ConditionKey key;
  std::vector<MetricSummary> metrics;  // parallel to metric_fields()
  std::size_t episodes = 0;

  const MetricSummary& metric(std::string_view name) const;
};

// Groups successful rows by condition; SE = sample stddev / sqrt(n), 0 when
// n = 1. Conditions with no successful rows produce no output row. Output is
// sorted by condition key.
std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& rows);

// Columns: regime,track,budget,policy,<m>_mean,<m>_se...,episodes
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);

}  // namespace wpb
