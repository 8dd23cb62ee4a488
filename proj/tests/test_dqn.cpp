#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "sfcsim/dqn.hpp"
#include "sfcsim/experiment.hpp"

using namespace sfc;

namespace {

nn::NetShape small_shape(std::size_t out = 25) { return nn::NetShape{{4, 3}, 6, {8}, out}; }

std::vector<double> random_state(std::mt19937_64& rng, std::size_t width) {
  std::vector<double> v(width);
  for (auto& x : v) x = std::uniform_real_distribution<double>(0, 1)(rng);
  return v;
}

// Makes the network output exactly its output bias.
void pin_output(nn::QNetwork& net, const std::vector<double>& q) {
  auto& params = net.params();
  auto& w = params[params.size() - 2];
  auto& b = params.back();
  std::fill(w.v.begin(), w.v.end(), 0.0);
  b.v = q;
}

std::string dump(const DqnAgent& a) {
  std::stringstream ss;
  a.save(ss);
  return ss.str();
}

}  // namespace

TEST(DqnEncoding, FreshPaperScenario) {
  const ScenarioConfig cfg = load_builtin("paper5dc");
  const Engine e = make_engine(cfg.episode);
  const StateEncoding enc = encode(e.state(), 64);
  ASSERT_EQ(enc.dc_block.size(), 5 * kDcFeatures);
  ASSERT_EQ(enc.sfc_block.size(), kNumSfcKinds * kSfcFeatures);
  ASSERT_EQ(enc.link_block.size(), 7U);
  for (int d = 0; d < 5; ++d) {
    EXPECT_EQ(enc.dc_block[d * kDcFeatures], 1.0);
    EXPECT_EQ(enc.dc_block[d * kDcFeatures + 1], 1.0);
    for (std::size_t f = 2; f < kDcFeatures; ++f) EXPECT_EQ(enc.dc_block[d * kDcFeatures + f], 0.0);
  }
  for (double v : enc.link_block) EXPECT_EQ(v, 1.0);
  EXPECT_EQ(enc.flat().size(), make_shape(cfg.dqn, 5, 7).input_width());
  EXPECT_EQ(make_shape(cfg.dqn, 5, 7).out, 61U);
}

TEST(DqnEncoding, StorageAfterOneNatInstall) {
  const ScenarioConfig cfg = load_builtin("paper5dc");
  Engine e = make_engine(cfg.episode);
  e.inject({make_request(*e.state().catalog, 1, SfcKind::CG, 0, 1, 4, 0)});
  ASSERT_EQ(e.allocate(1, 0), ActionStatus::Ok);
  const StateEncoding enc = encode(e.state(), 64);
  EXPECT_EQ(enc.dc_block[0], 1993.0 / 2000.0);
  EXPECT_EQ(enc.dc_block[1], 16380.0 / 16384.0);
  EXPECT_EQ(enc.dc_block[2 + kNumVnfKinds + index_of(VnfKind::NAT)], 1.0 / 64.0);  // in use
}

TEST(DqnEncoding, IndependentOfTagNames) {
  const ScenarioConfig cfg = load_builtin("paper3dc");
  Engine a = make_engine(cfg.episode);
  Engine b = make_engine(cfg.episode);
  const Catalog& c = *a.state().catalog;
  a.inject({make_request(c, 1, SfcKind::VoIP, 0, 1, 0.064, 0), make_request(c, 2, SfcKind::MIoT, 2, 1, 10, 0)});
  b.inject({make_request(c, 70, SfcKind::MIoT, 2, 1, 10, 0), make_request(c, 9, SfcKind::VoIP, 0, 1, 0.064, 0)});
  a.allocate(2, 1);
  b.allocate(70, 1);
  for (int i = 0; i < 3; ++i) {
    a.step();
    b.step();
  }
  EXPECT_EQ(encode(a.state(), 64), encode(b.state(), 64));
}

TEST(ReplayBuffer, FifoEvictionAndCapacity) {
  ReplayBuffer buf(3, 2);
  for (int i = 0; i < 5; ++i) {
    const std::vector<double> s{static_cast<double>(i), 0.5};
    buf.push(s, i, 0.25 * i, s, i % 2 == 0);
    EXPECT_LE(buf.size(), 3U);
  }
  ASSERT_EQ(buf.size(), 3U);
  for (std::size_t k = 0; k < 3; ++k) {
    const Transition t = buf.at(k);
    EXPECT_EQ(t.action, static_cast<int>(k + 2));
    EXPECT_EQ(t.s[0], static_cast<double>(k + 2));
    EXPECT_EQ(t.reward, 0.25 * static_cast<double>(k + 2));
    EXPECT_EQ(t.terminal, (k + 2) % 2 == 0);
  }
  EXPECT_THROW(buf.at(3), std::out_of_range);
  std::mt19937_64 rng(1);
  for (auto i : buf.sample(rng, 100)) EXPECT_LT(i, 3U);
  buf.clear();
  EXPECT_EQ(buf.size(), 0U);
  EXPECT_THROW(buf.sample(rng, 1), std::logic_error);
}

TEST(Epsilon, MonotoneAndBounded) {
  DqnConfig c;
  double prev = 2;
  for (std::int64_t e = 0; e <= 300; ++e) {
    const double eps = epsilon_at(c, e, 200);
    EXPECT_LE(eps, prev);
    EXPECT_GE(eps, c.eps_end);
    EXPECT_LE(eps, 1.0);
    prev = eps;
  }
  EXPECT_EQ(epsilon_at(c, 0, 200), 1.0);
  EXPECT_DOUBLE_EQ(epsilon_at(c, 50, 200), 1.0 - 0.95 * 0.5);
  EXPECT_EQ(epsilon_at(c, 100, 200), c.eps_end);
}

TEST(DqnAgent, UniformActionsAtEpsilonOne) {
  DqnAgent agent(small_shape(), DqnConfig{});
  std::mt19937_64 rng(3);
  const auto x = random_state(rng, agent.online().shape().input_width());
  const int n = agent.num_actions();
  std::vector<int> hist(n, 0);
  const int draws = 10'000;
  for (int i = 0; i < draws; ++i) ++hist[agent.select(x, 1.0)];
  double chi2 = 0;
  const double expected = static_cast<double>(draws) / n;
  for (int h : hist) chi2 += (h - expected) * (h - expected) / expected;
  const boost::math::chi_squared dist(n - 1);
  const double p = boost::math::cdf(boost::math::complement(dist, chi2));
  EXPECT_GT(p, 0.01) << "chi2 " << chi2;
}

TEST(DqnAgent, GreedyAtEpsilonZero) {
  DqnAgent agent(small_shape(), DqnConfig{});
  std::vector<double> q(25, 0.0);
  q[17] = 3.0;
  q[4] = 2.9;
  pin_output(agent.online(), q);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(agent.select(random_state(rng, 7), 0.0), 17);
}

TEST(DqnAgent, TerminalFixedPointHasZeroLoss) {
  DqnAgent agent(small_shape(), DqnConfig{});
  std::vector<double> q(25, 0.0);
  q[3] = 2.5;
  pin_output(agent.online(), q);
  std::mt19937_64 rng(4);
  std::vector<Transition> batch;
  for (int i = 0; i < 8; ++i) batch.push_back({random_state(rng, 7), 3, 2.5, random_state(rng, 7), true});
  const nn::QNetwork before = agent.online();
  EXPECT_EQ(agent.train_on(batch), 0.0);
  EXPECT_TRUE(agent.online() == before);
}

TEST(DqnAgent, BellmanTargetUsesFrozenNetwork) {
  for (double gamma : {0.0, 0.9}) {
    DqnConfig c;
    c.gamma = gamma;
    c.target_sync = 1'000'000;
    DqnAgent agent(small_shape(), c);
    std::mt19937_64 rng(5);
    // Move the online network away from the target first.
    std::vector<Transition> warm{{random_state(rng, 7), 1, 1.0, random_state(rng, 7), false}};
    for (int i = 0; i < 5; ++i) agent.train_on(warm);
    ASSERT_FALSE(agent.online() == agent.target());

    std::vector<Transition> batch;
    for (int i = 0; i < 6; ++i)
      batch.push_back({random_state(rng, 7), i % 25, 0.5 * i, random_state(rng, 7), i == 5});
    double expect = 0;
    for (const auto& t : batch) {
      double y = t.reward;
      if (!t.terminal) {
        const auto qn = agent.target().forward(t.s_next);
        y += gamma * *std::max_element(qn.begin(), qn.end());
      }
      const double d = agent.online().forward(t.s)[t.action] - y;
      expect += d * d;
    }
    expect /= static_cast<double>(batch.size());
    const nn::QNetwork target_before = agent.target();
    EXPECT_NEAR(agent.train_on(batch), expect, 1e-12);
    EXPECT_TRUE(agent.target() == target_before);
  }
}

TEST(DqnAgent, BootstrapDiscountFollowsElapsedSteps) {
  DqnConfig c;
  c.gamma = 0.9;
  c.target_sync = 1'000'000;
  DqnAgent agent(small_shape(), c);
  std::mt19937_64 rng(11);
  std::vector<Transition> batch;
  for (int k : {0, 1, 3, 7}) {
    Transition t{random_state(rng, 7), 2 * k, 1.0, random_state(rng, 7), false};
    t.elapsed = k;
    batch.push_back(t);
  }
  double expect = 0;
  for (const auto& t : batch) {
    const auto qn = agent.target().forward(t.s_next);
    const double y = t.reward + std::pow(0.9, t.elapsed) * *std::max_element(qn.begin(), qn.end());
    const double d = agent.online().forward(t.s)[t.action] - y;
    expect += d * d;
  }
  expect /= static_cast<double>(batch.size());
  EXPECT_NEAR(agent.train_on(batch), expect, 1e-12);
}

TEST(ReplayBuffer, KeepsElapsedSteps) {
  ReplayBuffer buf(4, 2);
  const std::vector<double> s{0.1, 0.2};
  buf.push(s, 0, 1.0, s, false, 0);
  buf.push(s, 1, 1.0, s, false);
  buf.push(s, 2, 1.0, s, false, 5);
  EXPECT_EQ(buf.at(0).elapsed, 0);
  EXPECT_EQ(buf.at(1).elapsed, 1);
  EXPECT_EQ(buf.at(2).elapsed, 5);
  EXPECT_THROW(buf.push(s, 3, 1.0, s, false, -1), std::invalid_argument);
  EXPECT_EQ(buf.size(), 3U);
}

TEST(DqnAgent, TargetSyncsEveryKSteps) {
  DqnConfig c;
  c.target_sync = 3;
  DqnAgent agent(small_shape(), c);
  std::mt19937_64 rng(6);
  std::vector<Transition> batch{{random_state(rng, 7), 2, 1.0, random_state(rng, 7), false}};
  for (int i = 1; i <= 7; ++i) {
    agent.train_on(batch);
    EXPECT_EQ(agent.online() == agent.target(), i % 3 == 0) << "step " << i;
  }
}

TEST(DqnAgent, OneTransitionConvergesToItsTarget) {
  DqnConfig c;
  c.optimizer = "sgd";
  c.lr = 0.01;
  c.target_sync = 1'000'000;  // keep the bootstrap target fixed
  DqnAgent agent(small_shape(), c);
  std::mt19937_64 rng(7);
  const Transition t{random_state(rng, 7), 11, 1.5, random_state(rng, 7), false};
  const auto qn = agent.target().forward(t.s_next);
  const double y = t.reward + c.gamma * *std::max_element(qn.begin(), qn.end());
  int iters = 0;
  while (iters < 500 && std::abs(agent.online().forward(t.s)[11] - y) >= 1e-3) {
    agent.train_on({t});
    ++iters;
  }
  EXPECT_LT(std::abs(agent.online().forward(t.s)[11] - y), 1e-3);
  EXPECT_LE(iters, 500);
}

TEST(DqnAgent, AdamConvergesOnATerminalTransition) {
  DqnConfig c;
  c.optimizer = "adam";
  c.target_sync = 1'000'000;
  DqnAgent agent(small_shape(), c);
  std::mt19937_64 rng(8);
  const Transition t{random_state(rng, 7), 5, -2.0, random_state(rng, 7), true};
  for (int i = 0; i < 500; ++i) agent.train_on({t});
  EXPECT_NEAR(agent.online().forward(t.s)[5], -2.0, 1e-3);
}

TEST(DqnAgent, DivergenceIsReported) {
  DqnAgent agent(small_shape(), DqnConfig{});
  std::mt19937_64 rng(9);
  const Transition t{random_state(rng, 7), 0, std::numeric_limits<double>::infinity(), random_state(rng, 7), true};
  EXPECT_THROW(agent.train_on({t}), TrainingDiverged);
}

TEST(DqnAgent, CheckpointRoundTrip) {
  for (const char* opt : {"sgd", "adam"}) {
    DqnConfig c;
    c.optimizer = opt;
    DqnAgent agent(small_shape(), c);
    std::mt19937_64 rng(10);
    const Transition t{random_state(rng, 7), 5, 1.0, random_state(rng, 7), false};
    for (int i = 0; i < 3; ++i) agent.train_on({t});
    agent.episodes_done = 4;
    agent.planned_episodes = 9;
    const std::string text = dump(agent);
    std::stringstream in(text);
    DqnAgent back = DqnAgent::load(in);
    EXPECT_EQ(dump(back), text);
    EXPECT_EQ(back.config(), agent.config());
    EXPECT_TRUE(back.online() == agent.online());
    EXPECT_EQ(back.select(t.s, 0.5), agent.select(t.s, 0.5));
    EXPECT_EQ(back.train_on({t}), agent.train_on({t}));
  }
}

TEST(DqnPolicy, InvalidAllocationFallsBackToIdleWait) {
  ScenarioConfig cfg = load_builtin("tiny");
  Engine e = make_engine(cfg.episode);
  e.inject({make_request(*e.state().catalog, 1, SfcKind::CG, 0, 1, 4, 0)});
  nn::QNetwork net(make_shape(cfg.dqn, 2, 1), 1);
  ActionSpace space(2);
  std::vector<double> q(space.size(), 0.0);
  q[space.encode(PolicyAction::allocate(VnfKind::FW, 0))] = 1.0;  // the pending head is a NAT
  pin_output(net, q);
  DqnPolicy policy(net, cfg.reward, cfg.dqn);
  PolicyContext ctx(e, cfg.episode.priority);
  const auto taken = policy.act(ctx);
  EXPECT_EQ(taken, std::vector<PolicyAction>{PolicyAction::idle()});
  EXPECT_EQ(policy.stats().invalid, 1);
  EXPECT_EQ(policy.stats().cumulative_reward, -cfg.reward.r_invalid);
  EXPECT_FALSE(e.state().live.at(1).chain.front().allocated());
}

TEST(DqnPolicy, NoDecisionWithoutPendingHeads) {
  ScenarioConfig cfg = load_builtin("tiny");
  Engine e = make_engine(cfg.episode);
  nn::QNetwork net(make_shape(cfg.dqn, 2, 1), 1);
  DqnPolicy policy(net, cfg.reward, cfg.dqn);
  PolicyContext ctx(e, cfg.episode.priority);
  EXPECT_TRUE(policy.act(ctx).empty());
  EXPECT_EQ(policy.stats().decisions, 0);
}

TEST(DqnTraining, ZeroEpisodesLeaveTheAgentUnchanged) {
  const ScenarioConfig cfg = load_builtin("tiny");
  DqnAgent agent = make_agent(cfg);
  const std::string before = dump(agent);
  TrainOptions opt;
  opt.episodes = 0;
  opt.reward = cfg.reward;
  EXPECT_TRUE(train(agent, opt).empty());
  EXPECT_EQ(dump(agent), before);
}

TEST(DqnTraining, TinyScenarioIsSolved) {
  const ScenarioConfig cfg = load_builtin("tiny");
  DqnAgent agent = make_agent(cfg);
  agent.planned_episodes = cfg.train_episodes;
  TrainOptions opt;
  opt.episodes = cfg.train_episodes;
  opt.reward = cfg.reward;
  opt.episode_config = [&](std::int64_t e) { return training_episode(cfg, e); };
  const auto rows = train(agent, opt);
  ASSERT_EQ(rows.size(), 200U);
  EXPECT_EQ(rows.back().acceptance_ratio, 1.0);
  for (std::uint64_t seed = 1; seed <= 3; ++seed)
    EXPECT_EQ(run_once(cfg, "dqn", seed, &agent.online()).metrics.summary().acceptance_ratio(), 1.0);
}

TEST(DqnTraining, LearningCurveIsReproducible) {
  const ScenarioConfig cfg = load_builtin("tiny");
  auto run = [&] {
    DqnAgent agent = make_agent(cfg);
    agent.planned_episodes = 30;
    TrainOptions opt;
    opt.episodes = 30;
    opt.reward = cfg.reward;
    opt.episode_config = [&](std::int64_t e) { return training_episode(cfg, e); };
    std::stringstream curve;
    for (const auto& r : train(agent, opt)) write_curve_row(curve, r);
    return curve.str() + dump(agent);
  };
  EXPECT_EQ(run(), run());
}

TEST(DqnTraining, ResumeContinuesTheSchedule) {
  const ScenarioConfig cfg = load_builtin("tiny");
  auto options = [&](std::int64_t n) {
    TrainOptions opt;
    opt.episodes = n;
    opt.reward = cfg.reward;
    opt.episode_config = [&](std::int64_t e) { return training_episode(cfg, e); };
    return opt;
  };
  DqnAgent straight = make_agent(cfg);
  straight.planned_episodes = 20;
  const auto all = train(straight, options(20));

  DqnAgent first = make_agent(cfg);
  first.planned_episodes = 20;
  train(first, options(10));
  std::stringstream ss(dump(first));
  DqnAgent resumed = DqnAgent::load(ss);
  const auto rest = train(resumed, options(10));
  ASSERT_EQ(rest.size(), 10U);
  EXPECT_EQ(rest.front().episode, 10);
  EXPECT_EQ(rest.front().epsilon, all[10].epsilon);
  EXPECT_LE(rest.front().epsilon, all[9].epsilon);
}
