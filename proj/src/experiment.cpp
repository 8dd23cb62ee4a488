#include "sfcsim/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>

namespace sfc {

std::filesystem::path output_root() {
  const char* env = std::getenv("SFCSIM_OUT");
  return env && *env ? std::filesystem::path(env) : std::filesystem::path("out");
}

std::unique_ptr<Policy> make_policy(const std::string& policy, const ScenarioConfig& config, std::uint64_t seed,
                                    const nn::QNetwork* net) {
  if (policy == "heuristic") return std::make_unique<HeuristicPolicy>();
  if (policy == "random") return std::make_unique<RandomPolicy>(seed);
  if (policy == "dqn") {
    if (!net) throw ConfigError("policy dqn needs a trained checkpoint (--checkpoint)");
    const auto expected = make_shape(config.dqn, static_cast<int>(config.episode.nodes.size()),
                                     static_cast<int>(config.episode.edges.size()));
    if (net->shape().branch_in != expected.branch_in || net->shape().out != expected.out)
      throw ConfigError("checkpoint network does not match this scenario's topology");
    return std::make_unique<DqnPolicy>(*net, config.reward, config.dqn);
  }
  throw ConfigError("unknown policy \"" + policy + "\"");
}

EpisodeResult run_once(const ScenarioConfig& config, const std::string& policy, std::uint64_t seed,
                       const nn::QNetwork* net, std::ostream* trace) {
  EpisodeConfig ec = config.episode;
  ec.seed = seed;
  auto p = make_policy(policy, config, seed, net);
  if (trace) {
    TraceWriter writer(*trace);
    writer.header(config.hash, seed, policy, *config.episode.catalog);
    return run_episode(ec, *p, &writer);
  }
  return run_episode(ec, *p);
}

void write_run_artifacts(const std::filesystem::path& dir, const ScenarioConfig& config, const std::string& policy,
                         std::uint64_t seed, const EpisodeResult& result) {
  export_metrics(result.metrics, ExportMeta{config.hash, seed, policy, config.name}, dir);
  std::ofstream out(dir / "config.json");
  nlohmann::json resolved = config.resolved;
  resolved["seed"] = seed;
  resolved["policy"] = policy;
  out << resolved.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write " + (dir / "config.json").string());
}

std::vector<SweepRow> sweep(const ScenarioConfig& config, const std::vector<std::string>& policies,
                            const std::vector<std::uint64_t>& seeds, const nn::QNetwork* net, int jobs) {
  std::vector<SweepRow> rows;
  for (const auto& p : policies)
    for (auto s : seeds) rows.push_back({p, s, false, {}, {}});
  const auto n = static_cast<std::int64_t>(rows.size());
#pragma omp parallel for schedule(dynamic) num_threads(jobs > 0 ? jobs : 1)
  for (std::int64_t i = 0; i < n; ++i) {
    auto& row = rows[static_cast<std::size_t>(i)];
    try {
      row.summary = run_once(config, row.policy, row.seed, net).metrics.summary();
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  }
  return rows;
}

std::vector<Aggregate> aggregate(const std::vector<SweepRow>& rows) {
  std::vector<Aggregate> out;
  for (const auto& r : rows) {
    if (std::none_of(out.begin(), out.end(), [&](const Aggregate& a) { return a.policy == r.policy; }))
      out.push_back({r.policy, 0, 0, 0, {}});
  }
  for (auto& a : out) {
    std::vector<double> ratios;
    std::array<double, kNumSfcKinds> e2e_sum{};
    std::array<int, kNumSfcKinds> e2e_n{};
    for (const auto& r : rows) {
      if (r.policy != a.policy || !r.ok) continue;
      ratios.push_back(r.summary.acceptance_ratio().value_or(0.0));
      for (int k = 0; k < kNumSfcKinds; ++k)
        if (r.summary.e2e[k].count > 0) {
          e2e_sum[k] += r.summary.e2e[k].mean_ms;
          ++e2e_n[k];
        }
    }
    a.n = static_cast<int>(ratios.size());
    if (a.n > 0) {
      double sum = 0;
      for (double x : ratios) sum += x;
      a.mean_acceptance = sum / a.n;
      double ss = 0;
      for (double x : ratios) ss += (x - a.mean_acceptance) * (x - a.mean_acceptance);
      a.sd_acceptance = a.n > 1 ? std::sqrt(ss / (a.n - 1)) : 0.0;
    }
    for (int k = 0; k < kNumSfcKinds; ++k)
      a.mean_e2e_ms[k] = e2e_n[k] ? e2e_sum[k] / e2e_n[k] : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

namespace {
std::string num(double v, const char* spec = "%.6f") {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}
}  // namespace

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "row,policy,seed,generated,accepted,dropped,acceptance_ratio";
  for (SfcKind k : kAllSfcKinds) out << ",e2e_" << to_string(k) << "_ms";
  out << ",error\n";
  for (const auto& r : rows) {
    out << "seed," << r.policy << ',' << r.seed << ',';
    if (r.ok) {
      const auto ar = r.summary.acceptance_ratio();
      out << r.summary.generated() << ',' << r.summary.accepted() << ',' << r.summary.dropped() << ','
          << (ar ? num(*ar) : "");
      for (int k = 0; k < kNumSfcKinds; ++k)
        out << ',' << (r.summary.e2e[k].count ? num(r.summary.e2e[k].mean_ms, "%.4f") : "");
      out << ",\n";
    } else {
      out << ",,,";
      for (int k = 0; k < kNumSfcKinds; ++k) out << ',';
      std::string msg = r.error;
      for (auto& c : msg)
        if (c == ',' || c == '\n') c = ' ';
      out << ',' << msg << '\n';
    }
  }
  for (const auto& a : aggregate(rows)) {
    out << "mean," << a.policy << ",," << ",,," << num(a.mean_acceptance);
    for (int k = 0; k < kNumSfcKinds; ++k) out << ',' << num(a.mean_e2e_ms[k], "%.4f");
    out << ",\n";
    out << "sd," << a.policy << ",," << ",,," << num(a.sd_acceptance);
    for (int k = 0; k < kNumSfcKinds; ++k) out << ',';
    out << ",\n";
  }
}

DqnAgent make_agent(const ScenarioConfig& config) {
  return DqnAgent(make_shape(config.dqn, static_cast<int>(config.episode.nodes.size()),
                             static_cast<int>(config.episode.edges.size())),
                  config.dqn);
}

EpisodeConfig training_episode(const ScenarioConfig& config, std::int64_t episode) {
  EpisodeConfig ec = config.episode;
  ec.seed = training_seed(config.episode.seed, episode);
  return ec;
}

nn::QNetwork load_network(const std::filesystem::path& checkpoint, const ScenarioConfig& config) {
  std::ifstream in(checkpoint);
  if (!in) throw ConfigError("cannot open checkpoint " + checkpoint.string());
  DqnAgent agent = DqnAgent::load(in);
  const auto expected = make_shape(config.dqn, static_cast<int>(config.episode.nodes.size()),
                                   static_cast<int>(config.episode.edges.size()));
  if (agent.online().shape().branch_in != expected.branch_in || agent.online().shape().out != expected.out)
    throw ConfigError("checkpoint " + checkpoint.string() + " was trained on a different topology");
  return agent.online();
}

}  // namespace sfc
