#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sfcsim/scenario.hpp"

namespace sfc {

/// Output root: $SFCSIM_OUT if set, else "out".
std::filesystem::path output_root();

/// heuristic | random | dqn. "dqn" needs a network whose shape matches the topology.
std::unique_ptr<Policy> make_policy(const std::string& policy, const ScenarioConfig& config, std::uint64_t seed,
                                    const nn::QNetwork* net);

/// Runs one episode with config.episode but the given seed.
EpisodeResult run_once(const ScenarioConfig& config, const std::string& policy, std::uint64_t seed,
                       const nn::QNetwork* net, std::ostream* trace = nullptr);

/// Writes acceptance.csv, e2e.csv, resources.csv, summary.json and config.json.
void write_run_artifacts(const std::filesystem::path& dir, const ScenarioConfig& config, const std::string& policy,
                         std::uint64_t seed, const EpisodeResult& result);

struct SweepRow {
  std::string policy;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  MetricsSummary summary;
};

/// One episode per (policy, seed), run concurrently on up to `jobs` threads.
/// Failures are recorded per row; other rows are kept.
std::vector<SweepRow> sweep(const ScenarioConfig& config, const std::vector<std::string>& policies,
                            const std::vector<std::uint64_t>& seeds, const nn::QNetwork* net, int jobs);

struct Aggregate {
  std::string policy;
  int n = 0;
  double mean_acceptance = 0;
  double sd_acceptance = 0;
  std::array<double, kNumSfcKinds> mean_e2e_ms{};  // over seeds with accepted requests; NaN if none
};

std::vector<Aggregate> aggregate(const std::vector<SweepRow>& rows);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// Fresh agent sized for the scenario's topology.
DqnAgent make_agent(const ScenarioConfig& config);
/// Episode config for global training episode `episode`, seeded by training_seed().
EpisodeConfig training_episode(const ScenarioConfig& config, std::int64_t episode);

/// Network from a checkpoint file; throws on mismatch with the scenario topology.
nn::QNetwork load_network(const std::filesystem::path& checkpoint, const ScenarioConfig& config);

}  // namespace sfc
