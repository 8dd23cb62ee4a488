#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "sfcsim/dqn.hpp"
#include "sfcsim/episode.hpp"

namespace sfc {

/// A fully resolved experiment configuration.
struct ScenarioConfig {
  std::string name;
  std::string policy = "heuristic";  // heuristic | random | dqn
  EpisodeConfig episode;
  DqnConfig dqn;
  RewardSpec reward;
  std::int64_t train_episodes = 0;
  std::string output_dir;  // empty: derived from the output root
  // Canonical form with every default filled in.
  nlohmann::json resolved;
  // FNV-1a 64 of the canonical form without "seed" and "output_dir", as 16 hex digits.
  std::string hash;
};

/// Every key except "topology", with its default value.
nlohmann::json default_scenario_json();

std::vector<std::string> builtin_scenario_names();
/// Throws ConfigError for unknown names.
nlohmann::json builtin_scenario_json(const std::string& name);

/// Sets a dotted key ("dqn.lr") to a value parsed as JSON, falling back to a
/// plain string. Intermediate objects are created. Throws ConfigError.
void apply_override(nlohmann::json& j, const std::string& assignment);

/// Layers a user document over its "base" builtin (or the defaults), applies
/// overrides, validates and resolves. Throws ConfigError with an actionable message.
ScenarioConfig load_scenario(const nlohmann::json& user, const std::vector<std::string>& overrides = {});
ScenarioConfig load_builtin(const std::string& name, const std::vector<std::string>& overrides = {});
ScenarioConfig load_scenario_file(const std::string& path, const std::vector<std::string>& overrides = {});

std::string fnv1a64_hex(const std::string& bytes);

/// Seed used for training episode `episode` of a scenario with base seed `seed`.
std::uint64_t training_seed(std::uint64_t seed, std::int64_t episode);

}  // namespace sfc
