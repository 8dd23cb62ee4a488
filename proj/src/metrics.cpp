#include "sfcsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <string>

namespace sfc {

using nlohmann::json;

std::int64_t MetricsSummary::generated() const {
  std::int64_t n = 0;
  for (const auto& t : per_type) n += t.generated;
  return n;
}

std::int64_t MetricsSummary::accepted() const {
  std::int64_t n = 0;
  for (const auto& t : per_type) n += t.accepted;
  return n;
}

std::int64_t MetricsSummary::dropped() const {
  std::int64_t n = 0;
  for (const auto& t : per_type) n += t.dropped;
  return n;
}

std::optional<double> MetricsSummary::acceptance_ratio() const {
  const auto g = generated();
  if (g == 0) return std::nullopt;
  return static_cast<double>(accepted()) / static_cast<double>(g);
}

std::optional<double> MetricsSummary::acceptance_ratio(SfcKind k) const {
  const auto& t = per_type[index_of(k)];
  if (t.generated == 0) return std::nullopt;
  return static_cast<double>(t.accepted) / static_cast<double>(t.generated);
}

void MetricsBundle::record_completion(const CompletionRecord& c) {
  if (!finalized_.insert(c.tag).second) throw InvariantViolation("request finalised twice: " + std::to_string(c.tag));
  auto& t = per_type_[index_of(c.type)];
  if (c.within_deadline()) {
    ++t.accepted;
    e2e_[index_of(c.type)].push_back(c.e2e_steps);
  } else {
    ++t.dropped;
    ++t.late;
  }
}

void MetricsBundle::record_drop(const DropRecord& d) {
  if (!finalized_.insert(d.tag).second) throw InvariantViolation("request finalised twice: " + std::to_string(d.tag));
  ++per_type_[index_of(d.type)].dropped;
}

void MetricsBundle::sample_resources(const EngineState& state) {
  for (const auto& d : state.dcs) {
    ResourceSample s;
    s.step = state.step;
    s.dc = d.id();
    s.storage_used = d.max_storage() > 0
                         ? static_cast<double>(d.max_storage() - d.cur_storage()) / static_cast<double>(d.max_storage())
                         : 0.0;
    s.compute_used = d.max_compute() > 0
                         ? static_cast<double>(d.max_compute() - d.cur_compute()) / static_cast<double>(d.max_compute())
                         : 0.0;
    resources_.push_back(s);
  }
  ++n_samples_;
}

void MetricsBundle::absorb(const StepReport& report, const EngineState& state) {
  for (const auto& e : report.events)
    if (e.kind == EventKind::Inject) record_generated(static_cast<SfcKind>(e.sfc));
  for (; done_seen_ < state.done.size(); ++done_seen_) record_completion(state.done[done_seen_]);
  for (; dropped_seen_ < state.dropped.size(); ++dropped_seen_) record_drop(state.dropped[dropped_seen_]);
}

E2eStats e2e_stats(std::vector<Steps> values) {
  E2eStats s;
  s.count = static_cast<std::int64_t>(values.size());
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  const double to_ms = 1.0 / kStepsPerMs;
  const Steps sum = std::accumulate(values.begin(), values.end(), Steps{0});
  s.mean_ms = static_cast<double>(sum) / static_cast<double>(values.size()) * to_ms;
  const std::size_t n = values.size();
  s.median_ms = (n % 2 == 1 ? static_cast<double>(values[n / 2])
                            : 0.5 * static_cast<double>(values[n / 2 - 1] + values[n / 2])) *
                to_ms;
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
  s.p95_ms = static_cast<double>(values[std::max<std::size_t>(rank, 1) - 1]) * to_ms;
  return s;
}

MetricsSummary MetricsBundle::summary() const {
  MetricsSummary s;
  s.per_type = per_type_;
  for (int k = 0; k < kNumSfcKinds; ++k) s.e2e[k] = e2e_stats(e2e_[k]);
  DcId max_dc = -1;
  for (const auto& r : resources_) max_dc = std::max(max_dc, r.dc);
  s.mean_storage_used.assign(max_dc + 1, 0.0);
  s.mean_compute_used.assign(max_dc + 1, 0.0);
  for (const auto& r : resources_) {
    s.mean_storage_used[r.dc] += r.storage_used;
    s.mean_compute_used[r.dc] += r.compute_used;
  }
  if (n_samples_ > 0) {
    for (auto& v : s.mean_storage_used) v /= static_cast<double>(n_samples_);
    for (auto& v : s.mean_compute_used) v /= static_cast<double>(n_samples_);
  }
  s.samples = n_samples_;
  s.steps = steps_;
  return s;
}

json summary_to_json(const MetricsSummary& s, const ExportMeta& meta) {
  json j;
  j["schema"] = "sfcsim-summary/1";
  j["config_hash"] = meta.config_hash;
  j["seed"] = meta.seed;
  j["policy"] = meta.policy;
  j["scenario"] = meta.scenario;
  j["steps"] = s.steps;
  j["samples"] = s.samples;
  j["generated"] = s.generated();
  j["accepted"] = s.accepted();
  j["dropped"] = s.dropped();
  const auto ar = s.acceptance_ratio();
  j["acceptance_ratio"] = ar ? json(*ar) : json(nullptr);
  j["no_requests"] = !ar.has_value();
  for (SfcKind k : kAllSfcKinds) {
    const auto& t = s.per_type[index_of(k)];
    const auto& e = s.e2e[index_of(k)];
    const auto r = s.acceptance_ratio(k);
    j["types"][std::string(to_string(k))] = {
        {"generated", t.generated},
        {"accepted", t.accepted},
        {"dropped", t.dropped},
        {"late", t.late},
        {"acceptance_ratio", r ? json(*r) : json(nullptr)},
        {"e2e", {{"count", e.count}, {"mean_ms", e.mean_ms}, {"median_ms", e.median_ms}, {"p95_ms", e.p95_ms}}}};
  }
  j["resources"]["mean_storage_used"] = s.mean_storage_used;
  j["resources"]["mean_compute_used"] = s.mean_compute_used;
  auto mean = [](const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  j["resources"]["all_dc_mean_storage_used"] = mean(s.mean_storage_used);
  j["resources"]["all_dc_mean_compute_used"] = mean(s.mean_compute_used);
  return j;
}

MetricsSummary summary_from_json(const json& j) {
  MetricsSummary s;
  s.steps = j.at("steps").get<std::int64_t>();
  s.samples = j.at("samples").get<std::int64_t>();
  for (SfcKind k : kAllSfcKinds) {
    const auto& t = j.at("types").at(std::string(to_string(k)));
    auto& c = s.per_type[index_of(k)];
    c.generated = t.at("generated").get<std::int64_t>();
    c.accepted = t.at("accepted").get<std::int64_t>();
    c.dropped = t.at("dropped").get<std::int64_t>();
    c.late = t.at("late").get<std::int64_t>();
    auto& e = s.e2e[index_of(k)];
    e.count = t.at("e2e").at("count").get<std::int64_t>();
    e.mean_ms = t.at("e2e").at("mean_ms").get<double>();
    e.median_ms = t.at("e2e").at("median_ms").get<double>();
    e.p95_ms = t.at("e2e").at("p95_ms").get<double>();
  }
  s.mean_storage_used = j.at("resources").at("mean_storage_used").get<std::vector<double>>();
  s.mean_compute_used = j.at("resources").at("mean_compute_used").get<std::vector<double>>();
  return s;
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

void export_metrics(const MetricsBundle& bundle, const ExportMeta& meta, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  const MetricsSummary s = bundle.summary();

  {
    auto out = open_out(dir / "acceptance.csv");
    out << "type,generated,accepted,dropped,late,acceptance_ratio\n";
    for (SfcKind k : kAllSfcKinds) {
      const auto& t = s.per_type[index_of(k)];
      const auto r = s.acceptance_ratio(k);
      out << to_string(k) << ',' << t.generated << ',' << t.accepted << ',' << t.dropped << ',' << t.late << ','
          << (r ? fmt("%.6f", *r) : "") << '\n';
    }
  }
  {
    auto out = open_out(dir / "e2e.csv");
    out << "type,count,mean_ms,median_ms,p95_ms\n";
    for (SfcKind k : kAllSfcKinds) {
      const auto& e = s.e2e[index_of(k)];
      out << to_string(k) << ',' << e.count << ',' << fmt("%.4f", e.mean_ms) << ',' << fmt("%.4f", e.median_ms) << ','
          << fmt("%.4f", e.p95_ms) << '\n';
    }
  }
  {
    auto out = open_out(dir / "resources.csv");
    out << "step,dc,storage_used,compute_used\n";
    for (const auto& r : bundle.resources())
      out << r.step << ',' << r.dc << ',' << fmt("%.6f", r.storage_used) << ',' << fmt("%.6f", r.compute_used) << '\n';
  }
  {
    auto out = open_out(dir / "summary.json");
    out << summary_to_json(s, meta).dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for summary.json");
  }
}

MetricsSummary import_summary(const std::filesystem::path& summary_json) {
  std::ifstream in(summary_json);
  if (!in) throw std::runtime_error("cannot read " + summary_json.string());
  return summary_from_json(json::parse(in));
}

}  // namespace sfc
