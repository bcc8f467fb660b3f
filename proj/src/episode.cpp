#include "wpb/episode.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "wpb/rng.hpp"

namespace wpb {

namespace {

constexpr std::array<std::pair<Regime, std::string_view>, 4> kRegimeNames{{
    {Regime::kDefault, "default"},
    {Regime::kBurstDrift, "burst_drift"},
    {Regime::kRedundancy, "redundancy"},
    {Regime::kBurstRedundancy, "burst_redundancy"},
}};

// Snapshot payload shape. Sized so that a privileged-track WRITE in the
// default regime charges ~206 bytes including the fixed overhead.
constexpr std::array<std::string_view, 4> kParamKeys{"k0", "k1", "k2", "k3"};
constexpr std::size_t kParamValueLen = 5;
constexpr std::size_t kNoteLen = 6;
constexpr std::string_view kAlphabet = "abcdefghijklmnopqrstuvwxyz0123456789";

std::string random_token(Xoshiro256& rng, std::size_t len) {
  std::string out(len, '\0');
  for (auto& c : out) c = kAlphabet[rng.uniform_index(kAlphabet.size())];
  return out;
}

struct ApiState {
  std::string name;
  std::uint64_t version = 1;
  Params params;
  std::string note;

  void regenerate(Xoshiro256& rng) {
    for (auto key : kParamKeys) {
      params[std::string(key)] = random_token(rng, kParamValueLen);
    }
    note = random_token(rng, kNoteLen);
  }

  Observation snapshot() const {
    return Observation{name, "v" + std::to_string(version), params, note};
  }
};

double quantize_priority(double p) { return std::round(p * 1e4) / 1e4; }

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

std::string_view regime_name(Regime regime) {
  for (const auto& [r, name] : kRegimeNames) {
    if (r == regime) return name;
  }
  return "unknown";
}

std::optional<Regime> parse_regime(std::string_view name) {
  for (const auto& [r, n] : kRegimeNames) {
    if (n == name) return r;
  }
  return std::nullopt;
}

bool has_bursts(Regime regime) {
  return regime == Regime::kBurstDrift || regime == Regime::kBurstRedundancy;
}

bool has_redundancy(Regime regime) {
  return regime == Regime::kRedundancy || regime == Regime::kBurstRedundancy;
}

const std::vector<Regime>& all_regimes() {
  static const std::vector<Regime> regimes{
      Regime::kDefault, Regime::kBurstDrift, Regime::kRedundancy,
      Regime::kBurstRedundancy};
  return regimes;
}

std::string_view track_name(Track track) {
  return track == Track::kPrivileged ? "privileged" : "unprivileged";
}

std::optional<Track> parse_track(std::string_view name) {
  if (name == "privileged") return Track::kPrivileged;
  if (name == "unprivileged") return Track::kUnprivileged;
  return std::nullopt;
}

void GeneratorConfig::validate() const {
  if (api_pool < 1) throw std::invalid_argument("api_pool must be >= 1");
  if (!is_probability(drift_prob) || !is_probability(burst_drift_prob) ||
      !is_probability(redundancy_prob)) {
    throw std::invalid_argument("probabilities must lie in [0, 1]");
  }
  if (burst_interval < 1) {
    throw std::invalid_argument("burst_interval must be >= 1");
  }
  if (burst_len > burst_interval) {
    throw std::invalid_argument("burst_len must not exceed burst_interval");
  }
}

double drift_prob_at(const GeneratorConfig& config, std::size_t t) {
  if (has_bursts(config.regime) && t % config.burst_interval < config.burst_len) {
    return config.burst_drift_prob;
  }
  return config.drift_prob;
}

Episode generate_episode(const GeneratorConfig& config) {
  config.validate();

  Xoshiro256 rng(config.seed);
  std::vector<ApiState> apis(config.api_pool);
  for (std::size_t i = 0; i < apis.size(); ++i) {
    apis[i].name = "api_" + std::to_string(i);
    apis[i].regenerate(rng);
  }

  Episode episode;
  episode.config = config;
  episode.steps.reserve(config.num_steps);
  episode.labels.utility.reserve(config.num_steps);
  episode.labels.priority.reserve(config.num_steps);
  const std::string regime{regime_name(config.regime)};

  for (std::size_t t = 0; t < config.num_steps; ++t) {
    Observation obs;
    const bool drift = rng.uniform01() < drift_prob_at(config, t);
    if (drift) {
      auto& api = apis[rng.uniform_index(apis.size())];
      ++api.version;
      api.regenerate(rng);
      obs = api.snapshot();
      episode.labels.critical_steps.push_back(t);
    } else if (has_redundancy(config.regime) && t > 0 &&
               rng.uniform01() < config.redundancy_prob) {
      obs = episode.steps.back().observation;
    } else {
      obs = apis[rng.uniform_index(apis.size())].snapshot();
    }

    const double xi = rng.uniform01();
    episode.labels.utility.push_back(drift ? kCriticalUtility : kBackgroundUtility);
    episode.labels.priority.push_back(
        quantize_priority(drift ? 0.8 + 0.15 * xi : 0.15 * xi));
    episode.steps.push_back(Step{t, std::move(obs), Metadata{regime, std::nullopt}});
  }
  episode.labels.total_drift_events = episode.labels.critical_steps.size();
  return episode;
}

Step observed_step(const Episode& episode, std::size_t t, Track track) {
  Step step = episode.steps.at(t);
  if (track == Track::kPrivileged) {
    step.metadata.priority = episode.labels.priority.at(t);
  }
  return step;
}

nlohmann::json to_json(const Observation& obs) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : obs.params) params[k] = v;
  return nlohmann::json{{"api", obs.api},
                        {"version", obs.version},
                        {"params", std::move(params)},
                        {"note", obs.note}};
}

nlohmann::json to_json(const Metadata& meta) {
  nlohmann::json out = nlohmann::json::object();
  out["regime"] = meta.regime;
  if (meta.priority) out["priority"] = *meta.priority;
  return out;
}

std::string canonical_dump(const nlohmann::json& value) {
  return value.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);
}

}  // namespace wpb
