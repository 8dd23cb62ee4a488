#include <gtest/gtest.h>

#include <chrono>
#include <random>

#include "support/path_oracle.hpp"
#include "support/reference_sim.hpp"

using namespace sfc;
using namespace testing_support;

namespace {

std::string describe(const TraceEvent& e) {
  return "step " + std::to_string(e.step) + " kind " + std::string(to_string(e.kind)) + " tag " +
         std::to_string(e.tag) + " dc " + std::to_string(e.dc) + " func " + std::to_string(e.func) + " vnf " +
         std::to_string(e.vnf) + " value " + std::to_string(e.value);
}

}  // namespace

TEST(ReferenceSimulator, MicroScenariosMatchTheEngine) {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t total_events = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const MicroScenario sc = random_micro_scenario(seed);
    const RunLog ref = run_reference(sc);
    const RunLog eng = run_engine(sc);
    ASSERT_EQ(ref.statuses, eng.statuses) << "seed " << seed;
    const std::size_t n = std::min(ref.events.size(), eng.events.size());
    for (std::size_t i = 0; i < n; ++i)
      ASSERT_EQ(ref.events[i], eng.events[i])
          << "seed " << seed << " event " << i << "\n  reference: " << describe(ref.events[i])
          << "\n  engine:    " << describe(eng.events[i]);
    ASSERT_EQ(ref.events.size(), eng.events.size()) << "seed " << seed;
    total_events += ref.events.size();
  }
  EXPECT_GT(total_events, 500U);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 10.0);
}

TEST(PathOracle, RandomGraphsAgreeWithBruteForce) {
  std::mt19937_64 rng(20240601);
  int feasible = 0, infeasible = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = std::uniform_int_distribution<int>(2, 8)(rng);
    std::vector<NodeSpec> nodes;
    for (int i = 0; i < n; ++i)
      nodes.push_back({i, double(std::uniform_int_distribution<int>(0, 20)(rng)),
                       double(std::uniform_int_distribution<int>(0, 20)(rng))});
    std::vector<EdgeSpec> edges;
    const double p = std::uniform_real_distribution<double>(0.2, 0.9)(rng);
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        if (std::bernoulli_distribution(p)(rng)) {
          EdgeSpec e{a, b, 100'000, std::nullopt};
          // integer lengths make exact ties common
          if (std::bernoulli_distribution(0.5)(rng)) e.length_km = std::uniform_int_distribution<int>(1, 4)(rng);
          edges.push_back(e);
        }
    NetworkGraph g(nodes, edges);
    // random residuals through reservations on single edges
    for (const auto& e : g.edges()) {
      const Kbps used = std::uniform_int_distribution<Kbps>(0, 100'000)(rng);
      if (used > 0) g.reserve_bw(PathResult{{e.a, e.b}, 0}, used);
    }
    const DcId src = std::uniform_int_distribution<int>(0, n - 1)(rng);
    const DcId dest = std::uniform_int_distribution<int>(0, n - 1)(rng);
    const Kbps bw = std::uniform_int_distribution<Kbps>(1, 100'000)(rng);

    const auto expected = brute_force_min_length(g, src, dest, bw);
    for (bool prune : {true, false}) {
      const auto got = g.select_min_path(src, dest, bw, prune);
      ASSERT_EQ(got.has_value(), expected.has_value()) << "trial " << trial;
      if (!got) continue;
      EXPECT_TRUE(same_length(got->length_km, *expected)) << "trial " << trial;
      EXPECT_EQ(got->src(), src);
      EXPECT_EQ(got->dest(), dest);
      for (std::size_t i = 0; i + 1 < got->hops.size(); ++i)
        EXPECT_GE(g.residual(got->hops[i], got->hops[i + 1]), bw) << "trial " << trial;
      EXPECT_NEAR(path_length(g, got->hops), got->length_km, 1e-9);
      // lexicographically smallest among the minimum-length candidates
      for (const auto& hops : feasible_simple_paths(g, src, dest, bw))
        if (same_length(path_length(g, hops), *expected)) EXPECT_LE(got->hops, hops) << "trial " << trial;
    }
    (expected ? feasible : infeasible)++;
  }
  EXPECT_GT(feasible, 300);
  EXPECT_GT(infeasible, 50);
}
