// sfcsim: run, train and sweep SFC provisioning experiments.
//
// Exit codes: 0 ok, 1 configuration error, 2 runtime invariant violation or
// step cap, 3 training divergence.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sfcsim/experiment.hpp"

namespace fs = std::filesystem;
using namespace sfc;

namespace {

struct Common {
  std::string scenario;
  std::string config_path;
  std::vector<std::string> sets;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c) {
  auto* s = cmd->add_option("--scenario", c.scenario, "Builtin scenario: paper5dc, paper3dc, tiny");
  auto* f = cmd->add_option("--config", c.config_path, "JSON scenario file (may name a builtin as \"base\")");
  s->excludes(f);
  cmd->add_option("--set", c.sets, "Override a config key, e.g. --set dqn.lr=0.0005 (repeatable)");
  cmd->add_option("--out", c.out, "Output directory (default: $SFCSIM_OUT or ./out, then scenario/policy/seed)");
  cmd->add_option("--seed", c.seed, "Seed (overrides the config)");
}

ScenarioConfig load(const Common& c) {
  std::vector<std::string> sets = c.sets;
  if (c.seed) sets.push_back("seed=" + std::to_string(*c.seed));
  if (!c.config_path.empty()) return load_scenario_file(c.config_path, sets);
  if (!c.scenario.empty()) return load_builtin(c.scenario, sets);
  throw ConfigError("give --scenario NAME or --config FILE");
}

std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    try {
      const auto dots = part.find("..");
      if (dots != std::string::npos) {
        const auto lo = std::stoull(part.substr(0, dots));
        const auto hi = std::stoull(part.substr(dots + 2));
        if (hi < lo) throw ConfigError("empty seed range " + part);
        for (auto s = lo; s <= hi; ++s) out.push_back(s);
      } else {
        out.push_back(std::stoull(part));
      }
    } catch (const std::logic_error&) {
      throw ConfigError("bad seed list \"" + spec + "\" (use e.g. 1..10 or 1,2,5)");
    }
  }
  if (out.empty()) throw ConfigError("at least one seed is required");
  return out;
}

void save_checkpoint(const DqnAgent& agent, const fs::path& path) {
  // Write then rename so an interrupted write never clobbers the last good file.
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    agent.save(out);
  }
  fs::rename(tmp, path);
}

int cmd_run(const Common& c, const std::string& policy_flag, const std::string& checkpoint, bool trace) {
  const ScenarioConfig cfg = load(c);
  const std::string policy = policy_flag.empty() ? cfg.policy : policy_flag;
  const std::uint64_t seed = cfg.episode.seed;
  std::optional<nn::QNetwork> net;
  if (policy == "dqn") {
    if (checkpoint.empty()) throw ConfigError("policy dqn needs --checkpoint FILE");
    net = load_network(checkpoint, cfg);
  }
  const fs::path dir = !c.out.empty()              ? fs::path(c.out)
                       : !cfg.output_dir.empty()   ? fs::path(cfg.output_dir)
                                                   : output_root() / cfg.name / policy / ("seed" + std::to_string(seed));
  fs::create_directories(dir);
  std::ofstream trace_out;
  if (trace) {
    trace_out.open(dir / "trace.jsonl", std::ios::binary);
    if (!trace_out) throw std::runtime_error("cannot write trace");
  }
  const EpisodeResult res = run_once(cfg, policy, seed, net ? &*net : nullptr, trace ? &trace_out : nullptr);
  write_run_artifacts(dir, cfg, policy, seed, res);

  const MetricsSummary s = res.metrics.summary();
  const auto ar = s.acceptance_ratio();
  std::printf("%s %s seed=%llu hash=%s acceptance=%s (%lld/%lld)", cfg.name.c_str(), policy.c_str(),
              static_cast<unsigned long long>(seed), cfg.hash.c_str(), ar ? std::to_string(*ar).c_str() : "n/a",
              static_cast<long long>(s.accepted()), static_cast<long long>(s.generated()));
  for (SfcKind k : kAllSfcKinds) {
    const auto& e = s.e2e[index_of(k)];
    if (e.count) std::printf(" %s=%.3fms", std::string(to_string(k)).c_str(), e.mean_ms);
  }
  std::printf(" -> %s\n", dir.string().c_str());
  return 0;
}

int cmd_train(const Common& c, std::optional<std::int64_t> episodes_flag, const std::string& resume,
              std::int64_t checkpoint_every) {
  const ScenarioConfig cfg = load(c);
  const fs::path dir = !c.out.empty()            ? fs::path(c.out)
                       : !cfg.output_dir.empty() ? fs::path(cfg.output_dir)
                                                 : output_root() / cfg.name / "train";
  fs::create_directories(dir);
  const fs::path ckpt = dir / "checkpoint.txt";
  const fs::path curve_path = dir / "curve.csv";

  const int n_dcs = static_cast<int>(cfg.episode.nodes.size());
  const int n_edges = static_cast<int>(cfg.episode.edges.size());
  std::optional<DqnAgent> agent;
  std::ofstream curve;
  if (!resume.empty()) {
    std::ifstream in(resume);
    if (!in) throw ConfigError("cannot open checkpoint " + resume);
    agent.emplace(DqnAgent::load(in));
    const auto expected = make_shape(agent->config(), n_dcs, n_edges);
    if (!(agent->online().shape() == expected)) throw ConfigError("checkpoint does not match this scenario");
    curve.open(curve_path, std::ios::app);
  } else {
    agent.emplace(make_agent(cfg));
    agent->planned_episodes = episodes_flag.value_or(cfg.train_episodes);
    curve.open(curve_path, std::ios::trunc);
    write_curve_header(curve);
  }
  if (!curve) throw std::runtime_error("cannot write " + curve_path.string());
  const std::int64_t remaining = episodes_flag.value_or(agent->planned_episodes - agent->episodes_done);

  TrainOptions opt;
  opt.episodes = std::max<std::int64_t>(remaining, 0);
  opt.reward = cfg.reward;
  opt.episode_config = [&](std::int64_t e) { return training_episode(cfg, e); };
  opt.on_episode = [&](const CurveRow& row, const DqnAgent& a) {
    write_curve_row(curve, row);
    curve.flush();
    if (checkpoint_every > 0 && a.episodes_done % checkpoint_every == 0) save_checkpoint(a, ckpt);
    std::fprintf(stderr, "episode %lld eps=%.3f loss=%.4g acceptance=%s reward=%.1f decisions=%lld invalid=%lld\n",
                 static_cast<long long>(row.episode), row.epsilon, row.mean_loss,
                 row.acceptance_ratio ? std::to_string(*row.acceptance_ratio).c_str() : "n/a", row.cumulative_reward,
                 static_cast<long long>(row.decisions), static_cast<long long>(row.invalid));
  };
  try {
    train(*agent, opt);
  } catch (const TrainingDiverged& e) {
    std::fprintf(stderr, "training diverged: %s; last good checkpoint kept at %s\n", e.what(), ckpt.string().c_str());
    return 3;
  }
  save_checkpoint(*agent, ckpt);
  std::printf("%s trained %lld episodes (total %lld) hash=%s -> %s\n", cfg.name.c_str(),
              static_cast<long long>(opt.episodes), static_cast<long long>(agent->episodes_done), cfg.hash.c_str(),
              ckpt.string().c_str());
  return 0;
}

int cmd_sweep(const Common& c, const std::string& seeds_spec, const std::vector<std::string>& policies,
              const std::string& checkpoint, int jobs) {
  const ScenarioConfig cfg = load(c);
  const auto seeds = parse_seeds(seeds_spec);
  std::optional<nn::QNetwork> net;
  for (const auto& p : policies) {
    if (p != "heuristic" && p != "random" && p != "dqn") throw ConfigError("unknown policy \"" + p + "\"");
    if (p == "dqn" && !net) {
      if (checkpoint.empty()) throw ConfigError("policy dqn needs --checkpoint FILE");
      net = load_network(checkpoint, cfg);
    }
  }
  const fs::path dir = !c.out.empty()            ? fs::path(c.out)
                       : !cfg.output_dir.empty() ? fs::path(cfg.output_dir)
                                                 : output_root() / cfg.name / "sweep";
  fs::create_directories(dir);
  const auto rows = sweep(cfg, policies, seeds, net ? &*net : nullptr, jobs);
  std::ofstream out(dir / "sweep.csv");
  write_sweep_csv(out, rows);
  if (!out) throw std::runtime_error("cannot write sweep.csv");

  int failed = 0;
  for (const auto& r : rows)
    if (!r.ok) {
      ++failed;
      std::fprintf(stderr, "seed %llu (%s) failed: %s\n", static_cast<unsigned long long>(r.seed), r.policy.c_str(),
                   r.error.c_str());
    }
  for (const auto& a : aggregate(rows))
    std::printf("%s %s n=%d acceptance mean=%.4f sd=%.4f\n", cfg.name.c_str(), a.policy.c_str(), a.n,
                a.mean_acceptance, a.sd_acceptance);
  std::printf("hash=%s -> %s\n", cfg.hash.c_str(), (dir / "sweep.csv").string().c_str());
  return failed ? 2 : 0;
}

int cmd_show(const Common& c) {
  const ScenarioConfig cfg = load(c);
  std::cout << cfg.resolved.dump(2) << "\nhash " << cfg.hash << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SFC provisioning simulator"};
  app.require_subcommand(1);

  Common run_c, train_c, sweep_c, show_c;
  std::string run_policy, run_ckpt;
  bool run_trace = false;
  auto* run = app.add_subcommand("run", "Run one episode and export metrics");
  add_common(run, run_c);
  run->add_option("--policy", run_policy, "heuristic, random or dqn (default: from config)");
  run->add_option("--checkpoint", run_ckpt, "Trained DQN checkpoint for --policy dqn");
  run->add_flag("--trace", run_trace, "Also write trace.jsonl");

  std::optional<std::int64_t> train_episodes;
  std::string train_resume;
  std::int64_t ckpt_every = 10;
  auto* tr = app.add_subcommand("train", "Train a DQN agent");
  add_common(tr, train_c);
  tr->add_option("--episodes", train_episodes, "Episodes to run now (default: remaining planned episodes)");
  tr->add_option("--resume", train_resume, "Continue from a checkpoint");
  tr->add_option("--checkpoint-every", ckpt_every, "Episodes between checkpoints (0: only at the end)");

  std::string seeds_spec = "1..10";
  std::vector<std::string> policies{"heuristic"};
  std::string sweep_ckpt;
  int jobs = 1;
  auto* sw = app.add_subcommand("sweep", "Run many seeds and aggregate");
  add_common(sw, sweep_c);
  sw->add_option("--seeds", seeds_spec, "Seeds, e.g. 1..10 or 1,4,9");
  sw->add_option("--policies", policies, "Policies to compare")->delimiter(',');
  sw->add_option("--checkpoint", sweep_ckpt, "Trained DQN checkpoint when dqn is listed");
  sw->add_option("--jobs", jobs, "Parallel episodes")->check(CLI::PositiveNumber);

  auto* show = app.add_subcommand("show-config", "Print the resolved configuration and its hash");
  add_common(show, show_c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) return cmd_run(run_c, run_policy, run_ckpt, run_trace);
    if (tr->parsed()) return cmd_train(train_c, train_episodes, train_resume, ckpt_every);
    if (sw->parsed()) return cmd_sweep(sweep_c, seeds_spec, policies, sweep_ckpt, jobs);
    if (show->parsed()) return cmd_show(show_c);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const InvariantViolation& e) {
    std::fprintf(stderr, "invariant violation: %s\n", e.what());
    return 2;
  } catch (const StepLimitExceeded& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const TrainingDiverged& e) {
    std::fprintf(stderr, "training diverged: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
