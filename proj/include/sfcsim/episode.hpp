#pragma once

#include <functional>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "sfcsim/engine.hpp"
#include "sfcsim/metrics.hpp"
#include "sfcsim/policy.hpp"

namespace sfc {

class StepLimitExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything needed to run one episode.
struct EpisodeConfig {
  std::shared_ptr<const Catalog> catalog = std::make_shared<const Catalog>(default_catalog());
  std::vector<NodeSpec> nodes;
  std::vector<EdgeSpec> edges;
  std::vector<DcSpec> dcs;
  std::vector<WaveSpec> waves;
  std::uint64_t seed = 1;
  bool allow_loopback = false;
  EngineParams engine;
  PriorityParams priority;
  Steps t_model = 1;
  Steps sample_period = 1500;
  Steps step_cap = 2'000'000;
  // Keep stepping after the last request until idle instances are reaped.
  bool drain = true;
};

/// Line-delimited JSON trace of engine events.
class TraceWriter {
 public:
  explicit TraceWriter(std::ostream& out) : out_(out) {}
  // The header line also lists each SFC type's deadline in steps.
  void header(const std::string& config_hash, std::uint64_t seed, const std::string& policy, const Catalog& catalog);
  void write(const StepReport& report);

 private:
  std::ostream& out_;
};

/// Optional per-step hook (used by tests to inspect state after every step).
using StepObserver = std::function<void(const Engine&, const StepReport&)>;

struct EpisodeResult {
  MetricsBundle metrics;
  Steps steps = 0;
  std::int64_t generated = 0;
};

/// Injects waves, calls the policy every t_model steps while requests are in
/// flight, and steps until all waves are done (and, with drain, every DC is
/// empty). Throws StepLimitExceeded past step_cap.
EpisodeResult run_episode(const EpisodeConfig& config, Policy& policy, TraceWriter* trace = nullptr,
                          const StepObserver& observer = {});

/// Builds the engine for a config without running it.
Engine make_engine(const EpisodeConfig& config);

}  // namespace sfc
