#include "wpb/episode_io.hpp"

#include <fstream>
#include <sstream>

namespace wpb {

namespace {

using nlohmann::json;
using Code = EpisodeFileError::Code;

json generator_params_json(const GeneratorConfig& c) {
  return json{{"T", c.num_steps},
              {"api_pool", c.api_pool},
              {"drift_prob", c.drift_prob},
              {"burst_interval", c.burst_interval},
              {"burst_len", c.burst_len},
              {"burst_drift_prob", c.burst_drift_prob},
              {"redundancy_prob", c.redundancy_prob}};
}

json config_json(const GeneratorConfig& c) {
  json out = generator_params_json(c);
  out["regime"] = regime_name(c.regime);
  out["seed"] = c.seed;
  return out;
}

GeneratorConfig config_from_json(const json& j) {
  GeneratorConfig c;
  c.num_steps = j.at("T").get<std::size_t>();
  c.api_pool = j.at("api_pool").get<std::size_t>();
  c.drift_prob = j.at("drift_prob").get<double>();
  c.burst_interval = j.at("burst_interval").get<std::size_t>();
  c.burst_len = j.at("burst_len").get<std::size_t>();
  c.burst_drift_prob = j.at("burst_drift_prob").get<double>();
  c.redundancy_prob = j.at("redundancy_prob").get<double>();
  const auto name = j.at("regime").get<std::string>();
  const auto regime = parse_regime(name);
  if (!regime) throw std::invalid_argument("unknown regime '" + name + "'");
  c.regime = *regime;
  c.seed = j.at("seed").get<std::uint64_t>();
  c.validate();
  return c;
}

Observation observation_from_json(const json& j) {
  Observation obs;
  obs.api = j.at("api").get<std::string>();
  obs.version = j.at("version").get<std::string>();
  obs.note = j.at("note").get<std::string>();
  for (const auto& [k, v] : j.at("params").items()) {
    obs.params[k] = v.get<std::string>();
  }
  return obs;
}

Metadata metadata_from_json(const json& j) {
  Metadata meta;
  meta.regime = j.at("regime").get<std::string>();
  if (j.contains("priority")) meta.priority = j.at("priority").get<double>();
  return meta;
}

json header_json(const std::vector<Episode>& episodes) {
  const GeneratorConfig params =
      episodes.empty() ? GeneratorConfig{} : episodes.front().config;
  return json{{"format_version", kEpisodeFormatVersion},
              {"episodes", episodes.size()},
              {"generator_params", generator_params_json(params)}};
}

[[noreturn]] void malformed(std::size_t line, const std::string& why) {
  throw EpisodeFileError(Code::kMalformedRecord,
                         "malformed record at line " + std::to_string(line) +
                             ": " + why);
}

}  // namespace

json episode_to_json(const Episode& episode) {
  json steps = json::array();
  for (const auto& step : episode.steps) {
    steps.push_back(json{{"t", step.t},
                         {"observation", to_json(step.observation)},
                         {"metadata", to_json(step.metadata)}});
  }
  const auto& l = episode.labels;
  json labels{{"critical_steps", l.critical_steps},
              {"total_drift_events", l.total_drift_events},
              {"utility", l.utility},
              {"priority", l.priority}};
  return json{{"config", config_json(episode.config)},
              {"steps", std::move(steps)},
              {"labels", std::move(labels)}};
}

Episode episode_from_json(const json& record) {
  Episode ep;
  ep.config = config_from_json(record.at("config"));
  for (const auto& s : record.at("steps")) {
    ep.steps.push_back(Step{s.at("t").get<std::size_t>(),
                            observation_from_json(s.at("observation")),
                            metadata_from_json(s.at("metadata"))});
  }
  const auto& l = record.at("labels");
  ep.labels.critical_steps = l.at("critical_steps").get<std::vector<std::size_t>>();
  ep.labels.total_drift_events = l.at("total_drift_events").get<std::size_t>();
  ep.labels.utility = l.at("utility").get<std::vector<double>>();
  ep.labels.priority = l.at("priority").get<std::vector<double>>();

  const std::size_t n = ep.config.num_steps;
  if (ep.steps.size() != n || ep.labels.utility.size() != n ||
      ep.labels.priority.size() != n) {
    throw std::invalid_argument("step/label count does not match T");
  }
  for (std::size_t t = 0; t < n; ++t) {
    if (ep.steps[t].t != t) throw std::invalid_argument("non-sequential step index");
  }
  if (ep.labels.critical_steps.size() != ep.labels.total_drift_events) {
    throw std::invalid_argument("total_drift_events != |critical_steps|");
  }
  for (auto t : ep.labels.critical_steps) {
    if (t >= n) throw std::invalid_argument("critical step out of range");
  }
  return ep;
}

std::string serialize_episodes(const std::vector<Episode>& episodes) {
  std::string out = canonical_dump(header_json(episodes));
  out += '\n';
  for (const auto& ep : episodes) {
    out += canonical_dump(episode_to_json(ep));
    out += '\n';
  }
  return out;
}

std::vector<Episode> parse_episodes(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) malformed(1, "missing header");

  std::size_t expected = 0;
  try {
    const json header = json::parse(line);
    const int version = header.at("format_version").get<int>();
    if (version != kEpisodeFormatVersion) {
      throw EpisodeFileError(Code::kVersionMismatch,
                             "unsupported format_version " +
                                 std::to_string(version) + " (expected " +
                                 std::to_string(kEpisodeFormatVersion) + ")");
    }
    expected = header.at("episodes").get<std::size_t>();
    header.at("generator_params");
  } catch (const json::exception& e) {
    malformed(1, e.what());
  }

  std::vector<Episode> episodes;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) malformed(lineno, "empty line");
    try {
      episodes.push_back(episode_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      malformed(lineno, e.what());
    } catch (const std::invalid_argument& e) {
      malformed(lineno, e.what());
    }
  }
  if (!text.empty() && text.back() != '\n') {
    malformed(lineno, "truncated final record");
  }
  if (episodes.size() != expected) {
    malformed(lineno, "expected " + std::to_string(expected) +
                          " episode records, found " +
                          std::to_string(episodes.size()));
  }
  return episodes;
}

void freeze_episodes(const std::vector<Episode>& episodes,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw EpisodeFileError(Code::kIo, "cannot open " + path.string() + " for writing");
  }
  out << serialize_episodes(episodes);
  if (!out) throw EpisodeFileError(Code::kIo, "write failed: " + path.string());
}

std::vector<Episode> load_episodes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw EpisodeFileError(Code::kMissingFile, "cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_episodes(buf.str());
}

std::vector<Episode> generate_episode_set(GeneratorConfig base, Regime regime,
                                          std::size_t count,
                                          std::uint64_t base_seed) {
  std::vector<Episode> out;
  out.reserve(count);
  base.regime = regime;
  for (std::size_t i = 0; i < count; ++i) {
    base.seed = base_seed + i;
    out.push_back(generate_episode(base));
  }
  return out;
}

}  // namespace wpb
