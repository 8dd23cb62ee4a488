#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "sfcsim/engine.hpp"

namespace sfc {

struct TypeCounts {
  std::int64_t generated = 0;
  std::int64_t accepted = 0;
  std::int64_t dropped = 0;  // deadline drops plus late completions
  std::int64_t late = 0;     // completions that exceeded the deadline (subset of dropped)
  bool operator==(const TypeCounts&) const = default;
};

struct E2eStats {
  std::int64_t count = 0;
  double mean_ms = 0;
  double median_ms = 0;
  double p95_ms = 0;
  bool operator==(const E2eStats&) const = default;
};

struct ResourceSample {
  Steps step = 0;
  DcId dc = 0;
  double storage_used = 0;  // fraction of capacity
  double compute_used = 0;
};

/// Aggregates that survive export/import unchanged.
struct MetricsSummary {
  std::array<TypeCounts, kNumSfcKinds> per_type{};
  std::array<E2eStats, kNumSfcKinds> e2e{};
  std::vector<double> mean_storage_used;  // per DC
  std::vector<double> mean_compute_used;
  std::int64_t samples = 0;
  std::int64_t steps = 0;

  std::int64_t generated() const;
  std::int64_t accepted() const;
  std::int64_t dropped() const;
  // Undefined (nullopt) when nothing was generated.
  std::optional<double> acceptance_ratio() const;
  std::optional<double> acceptance_ratio(SfcKind k) const;

  bool operator==(const MetricsSummary&) const = default;
};

/// Acceptance, E2E delay and resource series for one episode.
class MetricsBundle {
 public:
  void record_generated(SfcKind type) { ++per_type_[index_of(type)].generated; }
  // A completion past its deadline is counted as a drop. Throws
  // InvariantViolation if the tag was already finalised.
  void record_completion(const CompletionRecord& c);
  void record_drop(const DropRecord& d);
  void sample_resources(const EngineState& state);
  // Pulls generated/completed/dropped entries out of a step report and state.
  void absorb(const StepReport& report, const EngineState& state);
  void set_steps(Steps steps) { steps_ = steps; }

  const std::array<TypeCounts, kNumSfcKinds>& per_type() const { return per_type_; }
  const std::vector<ResourceSample>& resources() const { return resources_; }
  const std::vector<Steps>& accepted_e2e(SfcKind k) const { return e2e_[index_of(k)]; }
  std::int64_t num_samples() const { return n_samples_; }

  MetricsSummary summary() const;

 private:
  std::array<TypeCounts, kNumSfcKinds> per_type_{};
  std::array<std::vector<Steps>, kNumSfcKinds> e2e_{};
  std::vector<ResourceSample> resources_;
  std::unordered_set<SfcTag> finalized_;
  std::size_t done_seen_ = 0;
  std::size_t dropped_seen_ = 0;
  std::int64_t n_samples_ = 0;
  Steps steps_ = 0;
};

/// Mean, median and nearest-rank p95 over step counts, reported in ms.
E2eStats e2e_stats(std::vector<Steps> values);

struct ExportMeta {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string policy;
  std::string scenario;
};

nlohmann::json summary_to_json(const MetricsSummary& s, const ExportMeta& meta);
MetricsSummary summary_from_json(const nlohmann::json& j);

/// Writes acceptance.csv, e2e.csv, resources.csv and summary.json into dir.
/// Throws std::runtime_error on I/O failure.
void export_metrics(const MetricsBundle& bundle, const ExportMeta& meta, const std::filesystem::path& dir);
MetricsSummary import_summary(const std::filesystem::path& summary_json);

}  // namespace sfc
