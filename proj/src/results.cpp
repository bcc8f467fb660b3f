#include "wpb/results.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace wpb {

namespace {

using nlohmann::json;

// Renders already-formatted values under sorted keys.
std::string render_object(const std::map<std::string, std::string>& fields) {
  std::string out = "{";
  bool first = true;
  for (const auto& [key, value] : fields) {
    if (!first) out += ',';
    first = false;
    out += json(key).dump();
    out += ':';
    out += value;
  }
  out += '}';
  return out;
}

std::string json_string(std::string_view s) { return json(std::string(s)).dump(); }

}  // namespace

const std::vector<MetricField>& metric_fields() {
  static const std::vector<MetricField> fields{
      {"precision", [](const EpisodeMetrics& m) { return m.precision; }},
      {"recall", [](const EpisodeMetrics& m) { return m.recall; }},
      {"f1", [](const EpisodeMetrics& m) { return m.f1; }},
      {"utilization", [](const EpisodeMetrics& m) { return m.utilization; }},
      {"write_density", [](const EpisodeMetrics& m) { return m.write_density; }},
      {"expire_rate", [](const EpisodeMetrics& m) { return m.expire_rate; }},
      {"avg_staleness", [](const EpisodeMetrics& m) { return m.avg_staleness; }},
      {"drift_coverage", [](const EpisodeMetrics& m) { return m.drift_coverage; }},
      {"retained_utility", [](const EpisodeMetrics& m) { return m.retained_utility; }},
      {"utility_per_kb", [](const EpisodeMetrics& m) { return m.utility_per_kb; }},
      {"oracle_utility", [](const EpisodeMetrics& m) { return m.oracle_utility; }},
      {"regret_write_only", [](const EpisodeMetrics& m) { return m.regret_write_only; }},
      {"bytes_used", [](const EpisodeMetrics& m) { return static_cast<double>(m.bytes_used); }},
      {"budget_bytes", [](const EpisodeMetrics& m) { return static_cast<double>(m.budget_bytes); }},
      {"T", [](const EpisodeMetrics& m) { return static_cast<double>(m.T); }},
  };
  return fields;
}

std::string format_fixed6(double value) {
  if (value == 0.0) value = 0.0;  // no "-0.000000"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

std::string format_result_line(const ResultRow& row) {
  std::map<std::string, std::string> fields{
      {"regime", json_string(row.key.regime)},
      {"track", json_string(row.key.track)},
      {"budget", std::to_string(row.key.budget)},
      {"policy", json_string(row.key.policy)},
      {"episode_index", std::to_string(row.episode_index)},
  };
  if (!row.metrics) {
    fields["error"] = json_string(row.error);
    return render_object(fields);
  }
  const EpisodeMetrics& m = *row.metrics;
  for (const auto& f : metric_fields()) fields[std::string(f.name)] = format_fixed6(f.get(m));
  fields["bytes_used"] = std::to_string(m.bytes_used);
  fields["budget_bytes"] = std::to_string(m.budget_bytes);
  fields["T"] = std::to_string(m.T);
  fields["oracle_approximate"] = m.oracle_approximate ? "true" : "false";
  return render_object(fields);
}

ResultRow parse_result_line(std::string_view line) {
  try {
    const json j = json::parse(line);
    ResultRow row;
    row.key.regime = j.at("regime").get<std::string>();
    row.key.track = j.at("track").get<std::string>();
    row.key.budget = j.at("budget").get<Bytes>();
    row.key.policy = j.at("policy").get<std::string>();
    row.episode_index = j.at("episode_index").get<std::size_t>();
    if (j.contains("error")) {
      row.error = j.at("error").get<std::string>();
      return row;
    }
    EpisodeMetrics m;
    m.precision = j.at("precision").get<double>();
    m.recall = j.at("recall").get<double>();
    m.f1 = j.at("f1").get<double>();
    m.utilization = j.at("utilization").get<double>();
    m.write_density = j.at("write_density").get<double>();
    m.expire_rate = j.at("expire_rate").get<double>();
    m.avg_staleness = j.at("avg_staleness").get<double>();
    m.drift_coverage = j.at("drift_coverage").get<double>();
    m.retained_utility = j.at("retained_utility").get<double>();
    m.utility_per_kb = j.at("utility_per_kb").get<double>();
    m.oracle_utility = j.at("oracle_utility").get<double>();
    m.regret_write_only = j.at("regret_write_only").get<double>();
    m.bytes_used = j.at("bytes_used").get<Bytes>();
    m.budget_bytes = j.at("budget_bytes").get<Bytes>();
    m.T = j.at("T").get<std::size_t>();
    m.oracle_approximate = j.at("oracle_approximate").get<bool>();
    row.metrics = m;
    return row;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed result line: ") + e.what());
  }
}

std::vector<ResultRow> read_results(std::istream& in) {
  std::vector<ResultRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      rows.push_back(parse_result_line(line));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

void write_results(std::ostream& out, const std::vector<ResultRow>& rows) {
  for (const auto& row : rows) out << format_result_line(row) << '\n';
}

const MetricSummary& AggregateRow::metric(std::string_view name) const {
  const auto& fields = metric_fields();
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (fields[i].name == name) return metrics.at(i);
  }
  throw std::invalid_argument("unknown metric '" + std::string(name) + "'");
}

std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& rows) {
  const auto& fields = metric_fields();
  std::map<ConditionKey, std::vector<const EpisodeMetrics*>> groups;
  for (const auto& row : rows) {
    if (row.metrics) groups[row.key].push_back(&*row.metrics);
  }

  std::vector<AggregateRow> out;
  out.reserve(groups.size());
  for (const auto& [key, members] : groups) {
    AggregateRow agg{key, {}, members.size()};
    const double n = static_cast<double>(members.size());
    for (const auto& f : fields) {
      // Shifted by the first value so identical inputs give SE exactly 0.
      const double shift = f.get(*members.front());
      double sum = 0.0;
      for (const auto* m : members) sum += f.get(*m) - shift;
      const double offset = sum / n;
      const double mean = shift + offset;
      double se = 0.0;
      if (members.size() > 1) {
        double ss = 0.0;
        for (const auto* m : members) {
          const double d = f.get(*m) - shift - offset;
          ss += d * d;
        }
        se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
      }
      agg.metrics.push_back({mean, se});
    }
    out.push_back(std::move(agg));
  }
  return out;
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "regime,track,budget,policy";
  for (const auto& f : metric_fields()) out << ',' << f.name << "_mean," << f.name << "_se";
  out << ",episodes\n";
  for (const auto& row : rows) {
    out << row.key.regime << ',' << row.key.track << ',' << row.key.budget << ','
        << row.key.policy;
    for (const auto& s : row.metrics) {
      out << ',' << format_fixed6(s.mean) << ',' << format_fixed6(s.se);
    }
    out << ',' << row.episodes << '\n';
  }
}

}  // namespace wpb
