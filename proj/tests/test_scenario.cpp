#include <gtest/gtest.h>

#include <sstream>

#include "sfcsim/experiment.hpp"
#include "sfcsim/scenario.hpp"

using namespace sfc;
using nlohmann::json;

namespace {

json two_node_topology() {
  return {{"nodes", {{{"id", 0}, {"x_km", 0}, {"y_km", 0}}, {{"id", 1}, {"x_km", 10}, {"y_km", 0}}}},
          {"edges", {{{"a", 0}, {"b", 1}}}}};
}

std::string error_of(const json& doc, const std::vector<std::string>& overrides = {}) {
  try {
    load_scenario(doc, overrides);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Scenario, TopologyIsRequired) {
  EXPECT_NE(error_of(json::object()).find("topology required"), std::string::npos);
}

TEST(Scenario, UnknownKeysAreRejected) {
  EXPECT_NE(error_of({{"topology", two_node_topology()}, {"wavez", {0}}}).find("wavez"), std::string::npos);
}

TEST(Scenario, PaperScenarioSettings) {
  const ScenarioConfig c = load_builtin("paper5dc");
  EXPECT_EQ(c.episode.nodes.size(), 5U);
  for (const auto& d : c.episode.dcs) EXPECT_EQ(d, (DcSpec{2000, 64, 256}));
  ASSERT_EQ(c.episode.waves.size(), 4U);
  EXPECT_EQ(c.episode.waves[1].at, 2500);
  EXPECT_EQ(*c.episode.catalog, default_catalog());
  EXPECT_EQ(c.episode.sample_period, 1500);
  EXPECT_EQ(c.episode.engine.t_thresh, 500);
  for (const auto& e : c.episode.edges) EXPECT_EQ(e.capacity, 500'000);
  EXPECT_EQ(load_builtin("paper3dc").episode.nodes.size(), 3U);
  EXPECT_EQ(c.hash.size(), 16U);
  EXPECT_THROW(load_builtin("paper7dc"), ConfigError);
}

TEST(Scenario, HashIgnoresKeyOrderSeedAndOutputDir) {
  const json a = json::parse(R"({"base":"paper3dc","engine":{"t_thresh":300,"propagation":false},"seed":4})");
  const json b = json::parse(R"({"seed":9,"output_dir":"/tmp/x","engine":{"propagation":false,"t_thresh":300},"base":"paper3dc"})");
  EXPECT_EQ(load_scenario(a).hash, load_scenario(b).hash);
  EXPECT_NE(load_scenario(a).hash, load_builtin("paper3dc").hash);
}

TEST(Scenario, FlatOverrides) {
  const ScenarioConfig c =
      load_builtin("paper5dc", {"dqn.lr=0.01", "engine.t_thresh=42", "name=renamed", "catalog.sfcs.CG.e2e_ms=40"});
  EXPECT_EQ(c.dqn.lr, 0.01);
  EXPECT_EQ(c.episode.engine.t_thresh, 42);
  EXPECT_EQ(c.name, "renamed");
  EXPECT_EQ(c.episode.catalog->sfc(SfcKind::CG).e2e_ms, 40);
  EXPECT_EQ(c.resolved["engine"]["t_thresh"], 42);
  EXPECT_NE(error_of({{"base", "tiny"}}, {"noequals"}), "");
  EXPECT_NE(error_of({{"base", "tiny"}}, {"engine.t_thresh=0"}), "");
}

TEST(Scenario, ValidationMessages) {
  json doc{{"topology", two_node_topology()}};
  doc["datacenters"] = {{"per_dc", {{{"cpus", 8}}}}};
  EXPECT_NE(error_of(doc).find("per_dc"), std::string::npos);
  doc["datacenters"] = {{"per_dc", {{{"cpus", 8}}, {{"ram_gb", 4}}}}};
  const ScenarioConfig c = load_scenario(doc);
  EXPECT_EQ(c.episode.dcs[0], (DcSpec{2000, 8, 256}));
  EXPECT_EQ(c.episode.dcs[1], (DcSpec{2000, 64, 4}));
  json dup{{"topology", two_node_topology()}, {"waves", {0, 0}}};
  EXPECT_NE(error_of(dup), "");
  json badtype{{"topology", two_node_topology()}, {"policy", "greedy"}};
  EXPECT_NE(error_of(badtype).find("policy"), std::string::npos);
  json badvnf{{"topology", two_node_topology()}, {"catalog", {{"sfcs", {{"CG", {{"chain", {"DPI"}}}}}}}}};
  EXPECT_NE(error_of(badvnf).find("unknown VNF type"), std::string::npos);
}

TEST(Scenario, ManualWavesAndTinyBuiltin) {
  const ScenarioConfig c = load_builtin("tiny");
  ASSERT_EQ(c.episode.waves.size(), 1U);
  ASSERT_EQ(c.episode.waves[0].manual.size(), 1U);
  EXPECT_EQ(c.episode.waves[0].manual[0].type, SfcKind::Ind40);
  EXPECT_EQ(c.policy, "dqn");
  HeuristicPolicy h;
  const auto res = run_episode(c.episode, h);
  EXPECT_EQ(res.metrics.summary().acceptance_ratio(), 1.0);
}

TEST(Scenario, TrainingSeedsAreDistinctFromEvaluationSeeds) {
  for (std::uint64_t s = 1; s <= 10; ++s)
    for (std::int64_t e = 0; e < 2000; e += 97) EXPECT_GT(training_seed(s, e), 1000U);
  EXPECT_NE(training_seed(1, 0), training_seed(1, 1));
}

TEST(Sweep, SingleSeedAggregateEqualsTheRow) {
  const ScenarioConfig c = load_builtin("paper3dc");
  const auto rows = sweep(c, {"heuristic"}, {7}, nullptr, 1);
  ASSERT_EQ(rows.size(), 1U);
  ASSERT_TRUE(rows[0].ok) << rows[0].error;
  const auto agg = aggregate(rows);
  ASSERT_EQ(agg.size(), 1U);
  EXPECT_EQ(agg[0].n, 1);
  EXPECT_EQ(agg[0].mean_acceptance, *rows[0].summary.acceptance_ratio());
  EXPECT_EQ(agg[0].sd_acceptance, 0.0);
  for (int k = 0; k < kNumSfcKinds; ++k) EXPECT_EQ(agg[0].mean_e2e_ms[k], rows[0].summary.e2e[k].mean_ms);
}

TEST(Sweep, RowsAndAggregatesInCsv) {
  const ScenarioConfig c = load_builtin("tiny", {"policy=heuristic"});
  const auto rows = sweep(c, {"heuristic", "random"}, {1, 2, 3}, nullptr, 2);
  ASSERT_EQ(rows.size(), 6U);
  std::stringstream ss;
  write_sweep_csv(ss, rows);
  int seed_rows = 0, mean_rows = 0;
  for (std::string line; std::getline(ss, line);) {
    seed_rows += line.rfind("seed,", 0) == 0;
    mean_rows += line.rfind("mean,", 0) == 0;
  }
  EXPECT_EQ(seed_rows, 6);
  EXPECT_EQ(mean_rows, 2);
  // the same rows regardless of worker count
  const auto serial = sweep(c, {"heuristic", "random"}, {1, 2, 3}, nullptr, 1);
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i].summary, serial[i].summary);
}

TEST(Sweep, FailuresAreKeptPerRow) {
  const ScenarioConfig c = load_builtin("tiny");
  const auto rows = sweep(c, {"dqn", "heuristic"}, {1}, nullptr, 1);
  EXPECT_FALSE(rows[0].ok);
  EXPECT_NE(rows[0].error.find("checkpoint"), std::string::npos);
  EXPECT_TRUE(rows[1].ok);
}
