#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "sfcsim/episode.hpp"
#include "sfcsim/metrics.hpp"

using namespace sfc;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("sfcsim_test_" + name + "_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
  fs::remove_all(p);
  return p;
}

int line_count(const fs::path& p) {
  std::ifstream in(p);
  int n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

MetricsBundle bundle_with(const std::array<int, kNumSfcKinds>& generated, const std::array<int, kNumSfcKinds>& accepted) {
  MetricsBundle b;
  SfcTag tag = 1;
  for (int k = 0; k < kNumSfcKinds; ++k) {
    const auto kind = static_cast<SfcKind>(k);
    for (int i = 0; i < generated[k]; ++i) b.record_generated(kind);
    for (int i = 0; i < generated[k]; ++i) {
      if (i < accepted[k])
        b.record_completion({tag++, kind, 100 + i, 500, 0});
      else
        b.record_drop({tag++, kind, 0, 1});
    }
  }
  return b;
}

}  // namespace

TEST(Metrics, AllAccepted) {
  const auto s = bundle_with({10, 0, 0, 0, 0, 0}, {10, 0, 0, 0, 0, 0}).summary();
  EXPECT_EQ(s.acceptance_ratio(), 1.0);
}

TEST(Metrics, HalfAccepted) {
  const auto s = bundle_with({10, 0, 10, 0, 0, 0}, {5, 0, 5, 0, 0, 0}).summary();
  EXPECT_EQ(s.acceptance_ratio(), 0.5);
  EXPECT_EQ(s.acceptance_ratio(SfcKind::CG), 0.5);
  EXPECT_FALSE(s.acceptance_ratio(SfcKind::AugR));
}

TEST(Metrics, MixedBundleRatioIsExact) {
  const auto s = bundle_with({40, 2, 150, 60, 12, 3}, {40, 1, 150, 60, 8, 1}).summary();
  EXPECT_EQ(s.generated(), 267);
  EXPECT_EQ(s.accepted(), 260);
  EXPECT_EQ(*s.acceptance_ratio(), 260.0 / 267.0);
  for (const auto& t : s.per_type) EXPECT_EQ(t.accepted + t.dropped, t.generated);
}

TEST(Metrics, LateCompletionCountsAsDrop) {
  MetricsBundle b;
  b.record_generated(SfcKind::MIoT);
  b.record_completion({1, SfcKind::MIoT, 501, 500, 0});
  const auto s = b.summary();
  EXPECT_EQ(s.per_type[index_of(SfcKind::MIoT)].dropped, 1);
  EXPECT_EQ(s.per_type[index_of(SfcKind::MIoT)].late, 1);
  EXPECT_EQ(s.e2e[index_of(SfcKind::MIoT)].count, 0);
  EXPECT_THROW(b.record_drop({1, SfcKind::MIoT, 0, 1}), InvariantViolation);
}

TEST(Metrics, E2eStatsNearestRank) {
  std::vector<Steps> v;
  for (Steps i = 1; i <= 20; ++i) v.push_back(i * 100);
  const auto s = e2e_stats(v);
  EXPECT_EQ(s.count, 20);
  EXPECT_DOUBLE_EQ(s.mean_ms, 10.5);
  EXPECT_DOUBLE_EQ(s.median_ms, 10.5);
  EXPECT_DOUBLE_EQ(s.p95_ms, 19);  // rank ceil(0.95*20) = 19
  const auto one = e2e_stats({250});
  EXPECT_DOUBLE_EQ(one.p95_ms, 2.5);
  EXPECT_DOUBLE_EQ(one.median_ms, 2.5);
  EXPECT_EQ(e2e_stats({}).count, 0);
}

TEST(Metrics, ResourceFractions) {
  Engine e(std::make_shared<const Catalog>(default_catalog()), NetworkGraph({{0, 0, 0}, {1, 1, 0}}, {{0, 1}}),
           {DcSpec{}, DcSpec{}});
  MetricsBundle b;
  b.sample_resources(e.state());
  EXPECT_EQ(b.resources()[0].storage_used, 0.0);
  e.inject({make_request(*e.state().catalog, 1, SfcKind::CG, 0, 1, 4, 0)});
  e.allocate(1, 0);
  b.sample_resources(e.state());
  EXPECT_DOUBLE_EQ(b.resources()[2].storage_used, 7.0 / 2000.0);
  EXPECT_DOUBLE_EQ(b.resources()[2].compute_used, 4.0 / 16384.0);
  EXPECT_EQ(b.resources()[3].storage_used, 0.0);
}

TEST(Metrics, SamplesEverySamplePeriod) {
  EpisodeConfig cfg;
  cfg.nodes = {{0, 0, 0}, {1, 10, 0}};
  cfg.edges = {{0, 1}};
  cfg.dcs = {DcSpec{}, DcSpec{}};
  cfg.waves = schedule_waves({0});
  cfg.sample_period = 1500;
  HeuristicPolicy h;
  const auto res = run_episode(cfg, h);
  Steps prev = -1;
  for (const auto& r : res.metrics.resources()) {
    EXPECT_EQ(r.step % 1500, 0);
    EXPECT_GE(r.storage_used, 0.0);
    EXPECT_LE(r.storage_used, 1.0);
    if (r.dc == 0) {
      EXPECT_GT(r.step, prev);
      prev = r.step;
    }
  }
  EXPECT_EQ(res.metrics.num_samples(), res.steps / 1500 + 1);
}

TEST(Metrics, EmptyEpisodeExport) {
  EpisodeConfig cfg;
  cfg.nodes = {{0, 0, 0}, {1, 10, 0}};
  cfg.edges = {{0, 1}};
  cfg.dcs = {DcSpec{}, DcSpec{}};
  HeuristicPolicy h;
  const auto res = run_episode(cfg, h);
  EXPECT_EQ(res.steps, 0);
  EXPECT_EQ(res.generated, 0);
  const auto dir = temp_dir("empty");
  export_metrics(res.metrics, {"0000", 1, "heuristic", "x"}, dir);
  EXPECT_EQ(line_count(dir / "acceptance.csv"), 7);
  EXPECT_EQ(line_count(dir / "resources.csv"), 1 + 2);  // the step-0 sample
  std::ifstream in(dir / "summary.json");
  const auto j = nlohmann::json::parse(in);
  EXPECT_TRUE(j.at("no_requests").get<bool>());
  EXPECT_TRUE(j.at("acceptance_ratio").is_null());
  fs::remove_all(dir);
}

TEST(Metrics, ExportImportRoundTrip) {
  EpisodeConfig cfg;
  cfg.nodes = {{0, 0, 0}, {1, 40, 0}, {2, 0, 40}, {3, 40, 40}, {4, 20, 60}};
  cfg.edges = {{0, 1}, {1, 3}, {3, 4}, {4, 2}, {2, 0}};
  cfg.dcs.assign(5, DcSpec{});
  cfg.waves = schedule_waves({0, 2500});
  cfg.seed = 3;
  HeuristicPolicy h;
  const auto res = run_episode(cfg, h);
  const auto dir = temp_dir("roundtrip");
  export_metrics(res.metrics, {"abc", 3, "heuristic", "five"}, dir);
  EXPECT_EQ(import_summary(dir / "summary.json"), res.metrics.summary());
  EXPECT_EQ(line_count(dir / "resources.csv"), 1 + res.metrics.num_samples() * 5);
  fs::remove_all(dir);
}
