#include "sfcsim/episode.hpp"

#include <cstdio>
#include <functional>

namespace sfc {

void TraceWriter::header(const std::string& config_hash, std::uint64_t seed, const std::string& policy,
                         const Catalog& catalog) {
  out_ << R"({"schema":"sfcsim-trace/1","config_hash":")" << config_hash << R"(","seed":)" << seed
       << R"(,"policy":")" << policy << R"(","deadline_steps":{)";
  for (std::size_t i = 0; i < kAllSfcKinds.size(); ++i)
    out_ << (i ? "," : "") << '"' << to_string(kAllSfcKinds[i]) << "\":" << catalog.sfc(kAllSfcKinds[i]).deadline_steps();
  out_ << "}}\n";
}

void TraceWriter::write(const StepReport& report) {
  char buf[256];
  for (const auto& e : report.events) {
    const char* vnf = e.vnf >= 0 ? to_string(static_cast<VnfKind>(e.vnf)).data() : nullptr;
    const char* sfc = e.sfc >= 0 ? to_string(static_cast<SfcKind>(e.sfc)).data() : nullptr;
    std::snprintf(buf, sizeof buf,
                  R"({"v":1,"step":%lld,"event":"%s","tag":%lld,"dc":%d,"func":%d,"vnf":%s%s%s,"sfc":%s%s%s,"value":%lld})",
                  static_cast<long long>(e.step), to_string(e.kind).data(), static_cast<long long>(e.tag), e.dc,
                  e.func, vnf ? "\"" : "", vnf ? vnf : "null", vnf ? "\"" : "", sfc ? "\"" : "", sfc ? sfc : "null",
                  sfc ? "\"" : "", static_cast<long long>(e.value));
    out_ << buf << '\n';
  }
}

Engine make_engine(const EpisodeConfig& config) {
  return Engine(config.catalog, NetworkGraph(config.nodes, config.edges), config.dcs, config.engine);
}

EpisodeResult run_episode(const EpisodeConfig& config, Policy& policy, TraceWriter* trace,
                          const StepObserver& observer) {
  if (config.t_model < 1) throw ConfigError("t_model must be >= 1");
  if (config.sample_period < 1) throw ConfigError("sample_period must be >= 1");
  for (std::size_t i = 1; i < config.waves.size(); ++i)
    if (config.waves[i].at <= config.waves[i - 1].at) throw ConfigError("wave times must be strictly ascending");

  Engine engine = make_engine(config);
  PolicyContext ctx(engine, config.priority);
  EpisodeResult result;
  std::size_t next_wave = 0;
  SfcTag next_tag = 1;
  const int n_dcs = engine.state().num_dcs();

  auto all_empty = [&] {
    for (const auto& d : engine.state().dcs)
      if (!d.empty()) return false;
    return true;
  };

  while (true) {
    const Steps now = engine.now();
    while (next_wave < config.waves.size() && config.waves[next_wave].at == now) {
      const WaveSpec& w = config.waves[next_wave];
      auto records = w.manual.empty() ? generate_wave(*config.catalog, n_dcs, config.seed, static_cast<int>(next_wave),
                                                      next_tag, now, config.allow_loopback)
                                      : manual_wave(*config.catalog, n_dcs, w.manual, next_tag, now);
      next_tag += static_cast<SfcTag>(records.size());
      engine.inject(std::move(records));
      ++next_wave;
    }
    if (now % config.sample_period == 0) result.metrics.sample_resources(engine.state());

    const bool waves_done = next_wave == config.waves.size();
    if (waves_done && engine.state().idle() && (!config.drain || all_empty())) break;
    if (now >= config.step_cap) throw StepLimitExceeded("episode exceeded step cap of " + std::to_string(config.step_cap));

    if (!engine.state().idle() && now % config.t_model == 0) policy.act(ctx);
    StepReport report = engine.step();
    result.metrics.absorb(report, engine.state());
    policy.observe(report);
    if (trace) trace->write(report);
    if (observer) observer(engine, report);
  }
  result.steps = engine.now();
  result.generated = engine.state().generated;
  result.metrics.set_steps(result.steps);
  policy.end_episode(engine.state());
  return result;
}

}  // namespace sfc
