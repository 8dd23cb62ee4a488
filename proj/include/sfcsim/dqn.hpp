#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sfcsim/episode.hpp"
#include "sfcsim/nn/qnetwork.hpp"
#include "sfcsim/policy.hpp"

namespace sfc {

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DqnConfig {
  std::size_t embed = 32;
  std::vector<std::size_t> hidden{128, 64};
  double gamma = 0.95;
  double lr = 1e-3;
  double grad_clip = 5.0;     // global L2 norm; <= 0 disables
  std::string optimizer = "adam";  // "adam" or "sgd"
  std::size_t batch = 64;
  std::size_t buffer = 50'000;
  std::int64_t target_sync = 500;  // train steps between hard target syncs
  double eps_start = 1.0;
  double eps_end = 0.05;
  double eps_decay_fraction = 0.5;  // of the planned episodes
  int train_every = 4;              // transitions per gradient step
  int max_decisions = 32;           // agent decisions per policy invocation
  double count_cap = 64.0;          // instance/request counts are divided by this and clipped to 1
  std::uint64_t seed = 1;

  void validate() const;  // throws ConfigError
  bool operator==(const DqnConfig&) const = default;
};

struct RewardSpec {
  double r_complete = 10.0;  // granted per request served within its deadline
  double r_drop = 10.0;      // charged per dropped or late request
  double r_invalid = 1.0;    // charged per infeasible action
  double r_step = 0.0;       // added once per engine step
  double r_allocate = 0.0;   // granted per successful allocation
  double r_remote = 0.0;     // charged per allocation away from the request's current DC

  void validate() const;  // throws ConfigError
  bool operator==(const RewardSpec&) const = default;
};

// Full-object JSON forms (every key present).
nlohmann::json dqn_config_to_json(const DqnConfig& c);
DqnConfig dqn_config_from_json(const nlohmann::json& j);
nlohmann::json reward_to_json(const RewardSpec& r);
RewardSpec reward_from_json(const nlohmann::json& j);

/// Grouped features: one block per DC, per SFC type and per link.
struct StateEncoding {
  std::vector<double> dc_block;
  std::vector<double> sfc_block;
  std::vector<double> link_block;

  std::vector<double> flat() const;
  bool operator==(const StateEncoding&) const = default;
};

inline constexpr std::size_t kDcFeatures = 2 + 3 * kNumVnfKinds;
inline constexpr std::size_t kSfcFeatures = kNumVnfKinds + 2;

/// Branch input widths for a topology: {dc, sfc, link}.
std::vector<std::size_t> encoding_widths(int n_dcs, int n_edges);

/// Per DC: remaining storage and compute fractions, idle and in-use counts per
/// VNF type, and per VNF type the pending heads currently located at the DC.
/// Per SFC type: pending head counts per VNF type, min and mean remaining
/// deadline fraction (1 when none is live). Per edge: residual / capacity.
StateEncoding encode(const EngineState& state, double count_cap);

nn::NetShape make_shape(const DqnConfig& config, int n_dcs, int n_edges);

/// Linear decay from eps_start to eps_end over eps_decay_fraction * planned
/// episodes, then flat.
double epsilon_at(const DqnConfig& config, std::int64_t episode, std::int64_t planned_episodes);

struct Transition {
  std::vector<double> s;
  int action = 0;
  double reward = 0;
  std::vector<double> s_next;
  bool terminal = false;
  int elapsed = 1;  // engine steps between s and s_next; the bootstrap term is discounted by gamma^elapsed
};

/// FIFO ring of transitions. States are stored as float.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::size_t width);

  void push(std::span<const double> s, int action, double reward, std::span<const double> s_next, bool terminal,
            int elapsed = 1);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t width() const { return width_; }
  // i-th oldest transition
  Transition at(std::size_t i) const;
  /// n indices drawn uniformly with replacement from the current contents.
  std::vector<std::size_t> sample(std::mt19937_64& rng, std::size_t n) const;
  void clear();

 private:
  std::size_t slot(std::size_t i) const { return (head_ + i) % capacity_; }

  std::size_t capacity_;
  std::size_t width_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
  std::vector<float> s_, s_next_;
  std::vector<int> action_;
  std::vector<double> reward_;
  std::vector<std::uint8_t> terminal_;
  std::vector<int> elapsed_;
};

/// Online network, frozen target network, replay buffer and optimizer.
class DqnAgent {
 public:
  DqnAgent(nn::NetShape shape, DqnConfig config);

  const DqnConfig& config() const { return config_; }
  const nn::QNetwork& online() const { return online_; }
  nn::QNetwork& online() { return online_; }
  const nn::QNetwork& target() const { return target_; }
  ReplayBuffer& buffer() { return buffer_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  std::mt19937_64& rng() { return rng_; }

  int num_actions() const { return static_cast<int>(online_.shape().out); }
  int greedy(std::span<const double> x) const;
  int select(std::span<const double> x, double epsilon);

  /// One step on a uniformly sampled batch. Requires buffer().size() >= batch.
  double train_step();
  /// One step on an explicit batch. Returns the mean squared Bellman error
  /// before the update. Throws TrainingDiverged on a non-finite loss or parameter.
  double train_on(const std::vector<Transition>& batch);
  void sync_target() { target_.copy_params_from(online_); }

  std::int64_t train_steps() const { return train_steps_; }
  std::int64_t episodes_done = 0;
  std::int64_t planned_episodes = 0;

  void save(std::ostream& out) const;
  static DqnAgent load(std::istream& in);

 private:
  DqnConfig config_;
  nn::QNetwork online_;
  nn::QNetwork target_;
  ReplayBuffer buffer_;
  std::mt19937_64 rng_;
  std::int64_t train_steps_ = 0;
  // Adam moments
  std::vector<nn::Tensor> m_, v_;
  nn::QNetwork::Workspace ws_, ws_target_;
};

struct DqnEpisodeStats {
  double cumulative_reward = 0;
  std::int64_t decisions = 0;
  std::int64_t invalid = 0;
  double loss_sum = 0;
  std::int64_t loss_count = 0;
  double mean_loss() const { return loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0; }
};

/// Adapts an agent (training) or a frozen network (evaluation) to the Policy
/// interface. The network chooses (kind, vtype, dc); the served request under
/// AllocateVnf is chosen by priority points.
class DqnPolicy final : public Policy {
 public:
  // Training: epsilon-greedy, stores transitions and trains the agent.
  DqnPolicy(DqnAgent& agent, RewardSpec reward, double epsilon);
  // Evaluation: greedy and read-only; safe to run concurrently on one network.
  DqnPolicy(const nn::QNetwork& net, RewardSpec reward, DqnConfig config);

  std::string name() const override { return "dqn"; }
  std::vector<PolicyAction> act(PolicyContext& ctx) override;
  void observe(const StepReport& report) override;
  void end_episode(const EngineState& state) override;

  const DqnEpisodeStats& stats() const { return stats_; }

 private:
  int choose(std::span<const double> x);
  void close_pending(std::span<const double> s_next, bool terminal);

  DqnAgent* agent_ = nullptr;
  const nn::QNetwork* net_ = nullptr;
  RewardSpec reward_;
  DqnConfig config_;
  double epsilon_ = 0;
  bool training_ = false;

  bool has_pending_ = false;
  std::vector<double> pending_s_;
  int pending_action_ = 0;
  double pending_reward_ = 0;
  int pending_elapsed_ = 0;
  std::int64_t transitions_ = 0;
  DqnEpisodeStats stats_;
};

struct CurveRow {
  std::int64_t episode = 0;
  double epsilon = 0;
  double mean_loss = 0;
  std::optional<double> acceptance_ratio;
  double cumulative_reward = 0;
  std::int64_t decisions = 0;
  std::int64_t invalid = 0;
  std::int64_t train_steps = 0;  // agent total after the episode
};

void write_curve_header(std::ostream& out);
void write_curve_row(std::ostream& out, const CurveRow& row);

struct TrainOptions {
  std::int64_t episodes = 0;  // episodes to run in this call
  RewardSpec reward;
  // Builds the episode config for a global episode index.
  std::function<EpisodeConfig(std::int64_t)> episode_config;
  // Called after each episode; the agent is consistent at that point.
  std::function<void(const CurveRow&, const DqnAgent&)> on_episode;
};

/// Runs episodes agent.episodes_done .. +episodes with the epsilon schedule
/// over agent.planned_episodes. Throws TrainingDiverged.
std::vector<CurveRow> train(DqnAgent& agent, const TrainOptions& options);

}  // namespace sfc
