#include "sfcsim/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace sfc {

using nlohmann::json;

void DqnConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("dqn: " + m); };
  if (embed == 0) fail("embed must be positive");
  for (auto h : hidden)
    if (h == 0) fail("hidden widths must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) fail("gamma must be in [0, 1]");
  if (!(lr > 0.0)) fail("lr must be positive");
  if (optimizer != "sgd" && optimizer != "adam") fail("optimizer must be \"sgd\" or \"adam\"");
  if (batch == 0) fail("batch must be positive");
  if (buffer < batch) fail("buffer must hold at least one batch");
  if (target_sync < 1) fail("target_sync must be >= 1");
  if (!(eps_start >= 0.0 && eps_start <= 1.0) || !(eps_end >= 0.0 && eps_end <= eps_start))
    fail("need 0 <= eps_end <= eps_start <= 1");
  if (!(eps_decay_fraction >= 0.0 && eps_decay_fraction <= 1.0)) fail("eps_decay_fraction must be in [0, 1]");
  if (train_every < 1) fail("train_every must be >= 1");
  if (max_decisions < 1) fail("max_decisions must be >= 1");
  if (!(count_cap > 0.0)) fail("count_cap must be positive");
}

void RewardSpec::validate() const {
  for (double v : {r_complete, r_drop, r_invalid, r_allocate, r_remote})
    if (!(v >= 0.0)) throw ConfigError("reward magnitudes must be >= 0");
  if (!std::isfinite(r_step)) throw ConfigError("r_step must be finite");
}

std::vector<double> StateEncoding::flat() const {
  std::vector<double> out;
  out.reserve(dc_block.size() + sfc_block.size() + link_block.size());
  out.insert(out.end(), dc_block.begin(), dc_block.end());
  out.insert(out.end(), sfc_block.begin(), sfc_block.end());
  out.insert(out.end(), link_block.begin(), link_block.end());
  return out;
}

std::vector<std::size_t> encoding_widths(int n_dcs, int n_edges) {
  return {static_cast<std::size_t>(n_dcs) * kDcFeatures, kNumSfcKinds * kSfcFeatures,
          static_cast<std::size_t>(n_edges)};
}

StateEncoding encode(const EngineState& state, double count_cap) {
  const int n = state.num_dcs();
  auto scaled = [count_cap](double c) { return std::min(c / count_cap, 1.0); };

  std::vector<std::array<int, kNumVnfKinds>> local(n, std::array<int, kNumVnfKinds>{});
  std::array<std::array<int, kNumVnfKinds>, kNumSfcKinds> heads{};
  std::array<double, kNumSfcKinds> min_rem, sum_rem{};
  std::array<int, kNumSfcKinds> live_count{};
  min_rem.fill(1.0);
  for (const auto& [tag, r] : state.live) {
    const int t = index_of(r.type);
    const double rem =
        std::clamp(static_cast<double>(r.remaining_steps()) / static_cast<double>(r.deadline_steps), 0.0, 1.0);
    min_rem[t] = std::min(min_rem[t], rem);
    sum_rem[t] += rem;
    ++live_count[t];
    if (!r.chain.empty() && !r.chain.front().allocated()) {
      const int v = index_of(r.chain.front().vtype);
      ++heads[t][v];
      if (r.sfc_dc >= 0 && r.sfc_dc < n) ++local[r.sfc_dc][v];
    }
  }

  StateEncoding enc;
  enc.dc_block.reserve(static_cast<std::size_t>(n) * kDcFeatures);
  for (const auto& d : state.dcs) {
    enc.dc_block.push_back(d.max_storage() > 0 ? static_cast<double>(d.cur_storage()) / d.max_storage() : 0.0);
    enc.dc_block.push_back(d.max_compute() > 0
                               ? static_cast<double>(d.cur_compute()) / static_cast<double>(d.max_compute())
                               : 0.0);
    for (VnfKind k : kAllVnfKinds) enc.dc_block.push_back(scaled(d.idle_count(k)));
    for (VnfKind k : kAllVnfKinds) enc.dc_block.push_back(scaled(d.in_use_count(k)));
    for (int v = 0; v < kNumVnfKinds; ++v) enc.dc_block.push_back(scaled(local[d.id()][v]));
  }
  enc.sfc_block.reserve(kNumSfcKinds * kSfcFeatures);
  for (int t = 0; t < kNumSfcKinds; ++t) {
    for (int v = 0; v < kNumVnfKinds; ++v) enc.sfc_block.push_back(scaled(heads[t][v]));
    enc.sfc_block.push_back(min_rem[t]);
    enc.sfc_block.push_back(live_count[t] ? sum_rem[t] / live_count[t] : 1.0);
  }
  for (const auto& e : state.graph.edges())
    enc.link_block.push_back(e.capacity > 0 ? static_cast<double>(e.residual) / static_cast<double>(e.capacity) : 0.0);
  return enc;
}

nn::NetShape make_shape(const DqnConfig& config, int n_dcs, int n_edges) {
  nn::NetShape s;
  s.branch_in = encoding_widths(n_dcs, n_edges);
  s.embed = config.embed;
  s.hidden = config.hidden;
  s.out = static_cast<std::size_t>(ActionSpace(n_dcs).size());
  return s;
}

double epsilon_at(const DqnConfig& config, std::int64_t episode, std::int64_t planned_episodes) {
  const double decay = config.eps_decay_fraction * static_cast<double>(std::max<std::int64_t>(planned_episodes, 0));
  if (decay <= 0.0) return planned_episodes > 0 ? config.eps_end : config.eps_start;
  const double frac = static_cast<double>(std::max<std::int64_t>(episode, 0)) / decay;
  if (frac >= 1.0) return config.eps_end;
  return std::max(config.eps_end, config.eps_start + (config.eps_end - config.eps_start) * frac);
}

// ---------------------------------------------------------------------------

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t width)
    : capacity_(capacity),
      width_(width),
      s_(capacity * width),
      s_next_(capacity * width),
      action_(capacity),
      reward_(capacity),
      terminal_(capacity),
      elapsed_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be positive");
}

void ReplayBuffer::push(std::span<const double> s, int action, double reward, std::span<const double> s_next,
                        bool terminal, int elapsed) {
  if (s.size() != width_ || s_next.size() != width_) throw std::invalid_argument("transition width mismatch");
  if (elapsed < 0) throw std::invalid_argument("negative elapsed steps");
  std::size_t pos;
  if (size_ < capacity_) {
    pos = slot(size_);
    ++size_;
  } else {
    pos = head_;
    head_ = (head_ + 1) % capacity_;
  }
  std::transform(s.begin(), s.end(), s_.begin() + static_cast<std::ptrdiff_t>(pos * width_),
                 [](double x) { return static_cast<float>(x); });
  std::transform(s_next.begin(), s_next.end(), s_next_.begin() + static_cast<std::ptrdiff_t>(pos * width_),
                 [](double x) { return static_cast<float>(x); });
  action_[pos] = action;
  reward_[pos] = reward;
  terminal_[pos] = terminal ? 1 : 0;
  elapsed_[pos] = elapsed;
}

Transition ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("replay index out of range");
  const std::size_t pos = slot(i);
  Transition t;
  t.s.assign(s_.begin() + static_cast<std::ptrdiff_t>(pos * width_),
             s_.begin() + static_cast<std::ptrdiff_t>((pos + 1) * width_));
  t.s_next.assign(s_next_.begin() + static_cast<std::ptrdiff_t>(pos * width_),
                  s_next_.begin() + static_cast<std::ptrdiff_t>((pos + 1) * width_));
  t.action = action_[pos];
  t.reward = reward_[pos];
  t.terminal = terminal_[pos] != 0;
  t.elapsed = elapsed_[pos];
  return t;
}

std::vector<std::size_t> ReplayBuffer::sample(std::mt19937_64& rng, std::size_t n) const {
  if (size_ == 0) throw std::logic_error("sampling from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  std::vector<std::size_t> out(n);
  for (auto& i : out) i = pick(rng);
  return out;
}

void ReplayBuffer::clear() {
  head_ = 0;
  size_ = 0;
}

// ---------------------------------------------------------------------------

DqnAgent::DqnAgent(nn::NetShape shape, DqnConfig config)
    : config_(std::move(config)),
      online_(shape, config_.seed),
      target_(online_),
      buffer_(config_.buffer, shape.input_width()),
      rng_(config_.seed ^ 0x9e3779b97f4a7c15ULL) {
  config_.validate();
  if (config_.optimizer == "adam") {
    m_ = online_.zero_grads();
    v_ = online_.zero_grads();
  }
}

int DqnAgent::greedy(std::span<const double> x) const {
  const auto q = online_.forward(x);
  return static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin());
}

int DqnAgent::select(std::span<const double> x, double epsilon) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng_) < epsilon) {
    std::uniform_int_distribution<int> pick(0, num_actions() - 1);
    return pick(rng_);
  }
  return greedy(x);
}

double DqnAgent::train_step() {
  if (buffer_.size() < config_.batch) throw std::logic_error("replay buffer holds fewer transitions than one batch");
  const auto idx = buffer_.sample(rng_, config_.batch);
  std::vector<Transition> batch;
  batch.reserve(idx.size());
  for (auto i : idx) batch.push_back(buffer_.at(i));
  return train_on(batch);
}

double DqnAgent::train_on(const std::vector<Transition>& batch) {
  const std::size_t B = batch.size();
  if (B == 0) throw std::invalid_argument("empty batch");
  const std::size_t W = online_.shape().input_width();
  const std::size_t A = online_.shape().out;
  std::vector<double> x(B * W), xn(B * W);
  for (std::size_t r = 0; r < B; ++r) {
    if (batch[r].s.size() != W || batch[r].s_next.size() != W) throw std::invalid_argument("transition width mismatch");
    std::copy(batch[r].s.begin(), batch[r].s.end(), x.begin() + static_cast<std::ptrdiff_t>(r * W));
    std::copy(batch[r].s_next.begin(), batch[r].s_next.end(), xn.begin() + static_cast<std::ptrdiff_t>(r * W));
  }

  target_.forward(xn, B, ws_target_);
  online_.forward(x, B, ws_);
  std::vector<double> dq(B * A, 0.0);
  double loss = 0.0;
  for (std::size_t r = 0; r < B; ++r) {
    const auto& t = batch[r];
    if (t.action < 0 || static_cast<std::size_t>(t.action) >= A) throw std::invalid_argument("action out of range");
    double y = t.reward;
    if (!t.terminal) {
      const double* qn = ws_target_.q.data() + r * A;
      y += std::pow(config_.gamma, t.elapsed) * *std::max_element(qn, qn + A);
    }
    const double diff = ws_.q[r * A + static_cast<std::size_t>(t.action)] - y;
    loss += diff * diff;
    dq[r * A + static_cast<std::size_t>(t.action)] = 2.0 * diff / static_cast<double>(B);
  }
  loss /= static_cast<double>(B);
  if (!std::isfinite(loss))
    throw TrainingDiverged("non-finite loss at train step " + std::to_string(train_steps_));

  auto grads = online_.zero_grads();
  online_.backward(ws_, dq, grads);

  if (config_.grad_clip > 0.0) {
    double sq = 0.0;
    for (const auto& g : grads)
      for (double v : g.v) sq += v * v;
    const double norm = std::sqrt(sq);
    if (norm > config_.grad_clip) {
      const double scale = config_.grad_clip / norm;
      for (auto& g : grads)
        for (double& v : g.v) v *= scale;
    }
  }

  auto& params = online_.params();
  if (config_.optimizer == "adam") {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double t = static_cast<double>(train_steps_ + 1);
    const double c1 = 1.0 - std::pow(b1, t), c2 = 1.0 - std::pow(b2, t);
    for (std::size_t p = 0; p < params.size(); ++p)
      for (std::size_t i = 0; i < params[p].v.size(); ++i) {
        const double g = grads[p].v[i];
        double& m = m_[p].v[i];
        double& v = v_[p].v[i];
        m = b1 * m + (1 - b1) * g;
        v = b2 * v + (1 - b2) * g * g;
        params[p].v[i] -= config_.lr * (m / c1) / (std::sqrt(v / c2) + eps);
      }
  } else {
    for (std::size_t p = 0; p < params.size(); ++p)
      for (std::size_t i = 0; i < params[p].v.size(); ++i) params[p].v[i] -= config_.lr * grads[p].v[i];
  }
  if (!online_.finite()) throw TrainingDiverged("non-finite parameter after train step " + std::to_string(train_steps_));

  ++train_steps_;
  if (train_steps_ % config_.target_sync == 0) sync_target();
  return loss;
}

json dqn_config_to_json(const DqnConfig& c) {
  return {{"embed", c.embed},
          {"hidden", c.hidden},
          {"gamma", c.gamma},
          {"lr", c.lr},
          {"grad_clip", c.grad_clip},
          {"optimizer", c.optimizer},
          {"batch", c.batch},
          {"buffer", c.buffer},
          {"target_sync", c.target_sync},
          {"eps_start", c.eps_start},
          {"eps_end", c.eps_end},
          {"eps_decay_fraction", c.eps_decay_fraction},
          {"train_every", c.train_every},
          {"max_decisions", c.max_decisions},
          {"count_cap", c.count_cap},
          {"seed", c.seed}};
}

DqnConfig dqn_config_from_json(const json& j) {
  DqnConfig c;
  c.embed = j.at("embed").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::vector<std::size_t>>();
  c.gamma = j.at("gamma").get<double>();
  c.lr = j.at("lr").get<double>();
  c.grad_clip = j.at("grad_clip").get<double>();
  c.optimizer = j.at("optimizer").get<std::string>();
  c.batch = j.at("batch").get<std::size_t>();
  c.buffer = j.at("buffer").get<std::size_t>();
  c.target_sync = j.at("target_sync").get<std::int64_t>();
  c.eps_start = j.at("eps_start").get<double>();
  c.eps_end = j.at("eps_end").get<double>();
  c.eps_decay_fraction = j.at("eps_decay_fraction").get<double>();
  c.train_every = j.at("train_every").get<int>();
  c.max_decisions = j.at("max_decisions").get<int>();
  c.count_cap = j.at("count_cap").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

json reward_to_json(const RewardSpec& r) {
  return {{"r_complete", r.r_complete}, {"r_drop", r.r_drop},         {"r_invalid", r.r_invalid},
          {"r_step", r.r_step},         {"r_allocate", r.r_allocate}, {"r_remote", r.r_remote}};
}

RewardSpec reward_from_json(const json& j) {
  RewardSpec r;
  r.r_complete = j.at("r_complete").get<double>();
  r.r_drop = j.at("r_drop").get<double>();
  r.r_invalid = j.at("r_invalid").get<double>();
  r.r_step = j.at("r_step").get<double>();
  r.r_allocate = j.at("r_allocate").get<double>();
  r.r_remote = j.at("r_remote").get<double>();
  return r;
}

namespace {

void save_tensors(std::ostream& out, const std::vector<nn::Tensor>& ts) {
  char buf[40];
  out << "tensors " << ts.size() << '\n';
  for (const auto& t : ts) {
    out << t.name << ' ' << t.rows << ' ' << t.cols << '\n';
    for (std::size_t i = 0; i < t.v.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%a", t.v[i]);
      out << (i ? " " : "") << buf;
    }
    out << '\n';
  }
}

void load_tensors(std::istream& in, std::vector<nn::Tensor>& ts) {
  std::string word;
  std::size_t n = 0;
  in >> word >> n;
  if (word != "tensors" || n != ts.size()) throw std::runtime_error("checkpoint: optimizer state does not match network");
  for (auto& t : ts) {
    std::string name;
    std::size_t r = 0, c = 0;
    in >> name >> r >> c;
    if (name != t.name || r != t.rows || c != t.cols) throw std::runtime_error("checkpoint: bad optimizer tensor " + name);
    for (auto& x : t.v) {
      in >> word;
      x = std::strtod(word.c_str(), nullptr);
    }
  }
  if (!in) throw std::runtime_error("checkpoint: truncated optimizer state");
}

}  // namespace

// Text checkpoint:
//   sfcsim-dqn 1
//   config <json>
//   progress <episodes_done> <planned_episodes> <train_steps>
//   rng <engine state>
//   <online qnetwork block>
//   <target qnetwork block>
//   [tensors ... adam first moments] [tensors ... adam second moments]
void DqnAgent::save(std::ostream& out) const {
  out << "sfcsim-dqn 1\n";
  out << "config " << dqn_config_to_json(config_).dump() << '\n';
  out << "progress " << episodes_done << ' ' << planned_episodes << ' ' << train_steps_ << '\n';
  out << "rng " << rng_ << '\n';
  online_.save(out);
  target_.save(out);
  if (config_.optimizer == "adam") {
    save_tensors(out, m_);
    save_tensors(out, v_);
  }
  if (!out) throw std::runtime_error("checkpoint write failed");
}

DqnAgent DqnAgent::load(std::istream& in) {
  std::string word, line;
  int version = 0;
  in >> word >> version;
  if (word != "sfcsim-dqn" || version != 1) throw std::runtime_error("not an sfcsim-dqn v1 checkpoint");
  in >> word;
  if (word != "config") throw std::runtime_error("checkpoint: missing config line");
  std::getline(in, line);
  const DqnConfig config = dqn_config_from_json(json::parse(line));
  std::int64_t done = 0, planned = 0, steps = 0;
  in >> word >> done >> planned >> steps;
  if (word != "progress" || !in) throw std::runtime_error("checkpoint: missing progress line");
  in >> word;
  if (word != "rng") throw std::runtime_error("checkpoint: missing rng line");
  std::mt19937_64 rng;
  in >> rng;
  nn::QNetwork online = nn::QNetwork::load(in);
  nn::QNetwork target = nn::QNetwork::load(in);
  if (!(online.shape() == target.shape())) throw std::runtime_error("checkpoint: online/target shapes differ");

  DqnAgent agent(online.shape(), config);
  agent.online_ = std::move(online);
  agent.target_ = std::move(target);
  agent.rng_ = rng;
  agent.train_steps_ = steps;
  agent.episodes_done = done;
  agent.planned_episodes = planned;
  if (config.optimizer == "adam") {
    load_tensors(in, agent.m_);
    load_tensors(in, agent.v_);
  }
  return agent;
}

// ---------------------------------------------------------------------------

DqnPolicy::DqnPolicy(DqnAgent& agent, RewardSpec reward, double epsilon)
    : agent_(&agent), reward_(reward), config_(agent.config()), epsilon_(epsilon), training_(true) {
  reward_.validate();
}

DqnPolicy::DqnPolicy(const nn::QNetwork& net, RewardSpec reward, DqnConfig config)
    : net_(&net), reward_(reward), config_(std::move(config)) {
  reward_.validate();
}

namespace {
bool has_pending_head(const EngineState& s) {
  for (const auto& [tag, r] : s.live)
    if (!r.chain.empty() && !r.chain.front().allocated()) return true;
  return false;
}
}  // namespace

int DqnPolicy::choose(std::span<const double> x) {
  if (training_) return agent_->select(x, epsilon_);
  const auto q = net_->forward(x);
  return static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin());
}

void DqnPolicy::close_pending(std::span<const double> s_next, bool terminal) {
  if (!has_pending_) return;
  has_pending_ = false;
  if (!training_) return;
  agent_->buffer().push(pending_s_, pending_action_, pending_reward_, s_next, terminal, pending_elapsed_);
  ++transitions_;
  if (agent_->buffer().size() >= config_.batch && transitions_ % config_.train_every == 0) {
    stats_.loss_sum += agent_->train_step();
    ++stats_.loss_count;
  }
}

std::vector<PolicyAction> DqnPolicy::act(PolicyContext& ctx) {
  const EngineState& st = ctx.state();
  std::vector<PolicyAction> taken;
  if (!has_pending_head(st)) return taken;
  const ActionSpace space(st.num_dcs());

  for (int i = 0; i < config_.max_decisions; ++i) {
    const std::vector<double> x = encode(st, config_.count_cap).flat();
    close_pending(x, false);
    const int a = choose(x);
    ++stats_.decisions;
    has_pending_ = true;
    pending_s_ = x;
    pending_action_ = a;
    pending_reward_ = 0.0;
    pending_elapsed_ = 0;

    const PolicyAction action = space.decode(a);
    if (action.kind == PolicyAction::Kind::IdleWait) {
      taken.push_back(action);
      break;
    }
    const ActionOutcome out = ctx.apply(action);
    if (!out.ok()) {
      pending_reward_ -= reward_.r_invalid;
      stats_.cumulative_reward -= reward_.r_invalid;
      ++stats_.invalid;
      taken.push_back(PolicyAction::idle());
      break;
    }
    taken.push_back(action);
    if (action.kind == PolicyAction::Kind::AllocateVnf && out.tag) {
      double r = reward_.r_allocate;
      if (st.live.at(*out.tag).sfc_dc != action.dc) r -= reward_.r_remote;
      pending_reward_ += r;
      stats_.cumulative_reward += r;
    }
    if (!has_pending_head(st)) break;
  }
  return taken;
}

void DqnPolicy::observe(const StepReport& report) {
  const int late = report.completed - report.accepted;
  const double r = reward_.r_complete * report.accepted - reward_.r_drop * (report.dropped + late) + reward_.r_step;
  stats_.cumulative_reward += r;
  if (has_pending_) {
    pending_reward_ += r;
    ++pending_elapsed_;
  }
}

void DqnPolicy::end_episode(const EngineState& state) {
  if (has_pending_) close_pending(encode(state, config_.count_cap).flat(), true);
}

// ---------------------------------------------------------------------------

void write_curve_header(std::ostream& out) { out << "episode,epsilon,mean_loss,acceptance_ratio,cumulative_reward\n"; }

void write_curve_row(std::ostream& out, const CurveRow& row) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%lld,%.6f,%.9g,", static_cast<long long>(row.episode), row.epsilon, row.mean_loss);
  out << buf;
  if (row.acceptance_ratio) {
    std::snprintf(buf, sizeof buf, "%.6f", *row.acceptance_ratio);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, ",%.4f\n", row.cumulative_reward);
  out << buf;
}

std::vector<CurveRow> train(DqnAgent& agent, const TrainOptions& options) {
  if (!options.episode_config && options.episodes > 0) throw std::invalid_argument("train: episode_config missing");
  options.reward.validate();
  std::vector<CurveRow> rows;
  for (std::int64_t i = 0; i < options.episodes; ++i) {
    const std::int64_t episode = agent.episodes_done;
    const double eps = epsilon_at(agent.config(), episode, agent.planned_episodes);
    const EpisodeConfig ec = options.episode_config(episode);
    DqnPolicy policy(agent, options.reward, eps);
    const EpisodeResult res = run_episode(ec, policy);
    CurveRow row;
    row.episode = episode;
    row.epsilon = eps;
    row.mean_loss = policy.stats().mean_loss();
    row.acceptance_ratio = res.metrics.summary().acceptance_ratio();
    row.cumulative_reward = policy.stats().cumulative_reward;
    row.decisions = policy.stats().decisions;
    row.invalid = policy.stats().invalid;
    row.train_steps = agent.train_steps();
    ++agent.episodes_done;
    rows.push_back(row);
    if (options.on_episode) options.on_episode(row, agent);
  }
  return rows;
}

}  // namespace sfc
