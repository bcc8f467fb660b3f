#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "wpb/episode.hpp"

namespace wpb {

inline constexpr int kEpisodeFormatVersion = 1;

class EpisodeFileError : public std::runtime_error {
 public:
  enum class Code { kMissingFile, kMalformedRecord, kVersionMismatch, kIo };

  EpisodeFileError(Code code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Code code() const { return code_; }

 private:
  Code code_;
};

// Frozen-episode file: line-delimited canonical JSON. Line 1 is a header
// {"episodes":n,"format_version":1,"generator_params":{...}}, followed by one
// {"config","labels","steps"} record per episode.
void freeze_episodes(const std::vector<Episode>& episodes,
                     const std::filesystem::path& path);
std::vector<Episode> load_episodes(const std::filesystem::path& path);

// In-memory forms of the same format.
std::string serialize_episodes(const std::vector<Episode>& episodes);
std::vector<Episode> parse_episodes(const std::string& text);

nlohmann::json episode_to_json(const Episode& episode);
Episode episode_from_json(const nlohmann::json& record);

// Episodes i = 0..count-1 of one regime, episode i seeded with base_seed + i.
std::vector<Episode> generate_episode_set(GeneratorConfig base, Regime regime,
                                          std::size_t count,
                                          std::uint64_t base_seed);

}  // namespace wpb
