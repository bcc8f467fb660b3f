#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace wpb {

enum class Regime { kDefault, kBurstDrift, kRedundancy, kBurstRedundancy };

std::string_view regime_name(Regime regime);
std::optional<Regime> parse_regime(std::string_view name);
bool has_bursts(Regime regime);
bool has_redundancy(Regime regime);
const std::vector<Regime>& all_regimes();

// Observability track. The privileged track additionally exposes the
// per-step priority surrogate in step metadata.
enum class Track { kUnprivileged, kPrivileged };

std::string_view track_name(Track track);
std::optional<Track> parse_track(std::string_view name);

struct GeneratorConfig {
  std::size_t num_steps = 200;
  std::size_t api_pool = 8;
  double drift_prob = 0.08;
  std::size_t burst_interval = 50;
  std::size_t burst_len = 8;
  double burst_drift_prob = 0.6;
  double redundancy_prob = 0.7;
  Regime regime = Regime::kDefault;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument on a config outside the valid domain.
  void validate() const;

  bool operator==(const GeneratorConfig&) const = default;
};

using Params = std::map<std::string, std::string>;

// One API snapshot x_t. `params` is flat by construction.
struct Observation {
  std::string api;
  std::string version;
  Params params;
  std::string note;

  bool operator==(const Observation&) const = default;
};

// m_t. `priority` is only populated on the privileged track.
struct Metadata {
  std::string regime;
  std::optional<double> priority;

  bool operator==(const Metadata&) const = default;
};

struct Step {
  std::size_t t = 0;
  Observation observation;
  Metadata metadata;

  bool operator==(const Step&) const = default;
};

struct Labels {
  std::vector<std::size_t> critical_steps;  // sorted ascending
  std::size_t total_drift_events = 0;
  std::vector<double> utility;
  std::vector<double> priority;

  bool operator==(const Labels&) const = default;
};

struct Episode {
  GeneratorConfig config;
  std::vector<Step> steps;
  Labels labels;

  bool operator==(const Episode&) const = default;
};

inline constexpr double kCriticalUtility = 1.0;
inline constexpr double kBackgroundUtility = 0.01;

double drift_prob_at(const GeneratorConfig& config, std::size_t t);

Episode generate_episode(const GeneratorConfig& config);

// Step t as the policy sees it on `track`. Stored episodes carry benign
// metadata only; the privileged view adds labels.priority[t].
Step observed_step(const Episode& episode, std::size_t t, Track track);

// Canonical JSON forms. nlohmann::json objects are std::map-backed, so dump()
// yields keys in byte order (= code point order for UTF-8) with no whitespace.
nlohmann::json to_json(const Observation& obs);
nlohmann::json to_json(const Metadata& meta);
std::string canonical_dump(const nlohmann::json& value);

}  // namespace wpb
