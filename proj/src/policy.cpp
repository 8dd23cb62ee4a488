#include "sfcsim/policy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace sfc {

std::string to_string(const PolicyAction& a) {
  switch (a.kind) {
    case PolicyAction::Kind::AllocateVnf:
      return "allocate(" + std::string(to_string(a.vtype)) + "@" + std::to_string(a.dc) + ")";
    case PolicyAction::Kind::UninstallVnf:
      return "uninstall(" + std::string(to_string(a.vtype)) + "@" + std::to_string(a.dc) + ")";
    case PolicyAction::Kind::IdleWait: return "idle";
  }
  return "?";
}

PolicyAction ActionSpace::decode(int index) const {
  if (index < 0 || index >= size()) throw std::out_of_range("action index out of range");
  if (index == idle_index()) return PolicyAction::idle();
  const int per_kind = kNumVnfKinds * n_dcs_;
  const auto kind = index < per_kind ? PolicyAction::Kind::AllocateVnf : PolicyAction::Kind::UninstallVnf;
  const int rest = index % per_kind;
  return {kind, static_cast<VnfKind>(rest / n_dcs_), rest % n_dcs_};
}

int ActionSpace::encode(const PolicyAction& a) const {
  if (a.kind == PolicyAction::Kind::IdleWait) return idle_index();
  if (a.dc < 0 || a.dc >= n_dcs_) throw std::out_of_range("action dc out of range");
  const int base = a.kind == PolicyAction::Kind::AllocateVnf ? 0 : kNumVnfKinds * n_dcs_;
  return base + index_of(a.vtype) * n_dcs_ + a.dc;
}

Steps PriorityParams::t_urgency(Steps deadline_steps) const {
  return static_cast<Steps>(std::llround(urgency_fraction * static_cast<double>(deadline_steps)));
}

std::vector<SfcTag> candidate_set(const EngineState& state, DcId /*dc*/, VnfKind vtype) {
  std::vector<SfcTag> out;
  for (const auto& [tag, r] : state.live)
    if (!r.chain.empty() && r.chain.front().vtype == vtype && !r.chain.front().allocated()) out.push_back(tag);
  return out;
}

namespace {

// Memoises "is dc on the current minimum path" per (from, to, bw) within one query.
class PathCache {
 public:
  explicit PathCache(const NetworkGraph& g) : graph_(g) {}

  bool on_path(DcId from, DcId to, Kbps bw, DcId dc) {
    auto key = std::make_tuple(from, to, bw);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      std::vector<DcId> hops;
      if (auto p = graph_.select_min_path(from, to, bw)) hops = std::move(p->hops);
      it = cache_.emplace(key, std::move(hops)).first;
    }
    return std::find(it->second.begin(), it->second.end(), dc) != it->second.end();
  }

 private:
  const NetworkGraph& graph_;
  std::map<std::tuple<DcId, DcId, Kbps>, std::vector<DcId>> cache_;
};

PriorityScore score(const SfcRecord& r, DcId dc, const PriorityParams& params, PathCache& paths) {
  PriorityScore s;
  const Steps remaining = r.remaining_steps();
  const double frac = 1.0 - static_cast<double>(remaining) / static_cast<double>(r.deadline_steps);
  s.p1_deadline = std::clamp(frac, 0.0, 1.0);
  if (dc == r.src_dc)
    s.p2_dc_relation = 2;
  else if (paths.on_path(r.sfc_dc, r.dest_dc, r.bw, dc))
    s.p2_dc_relation = 1;
  bool affinity = r.placed_on(dc);
  for (const VnfState& v : r.chain) affinity = affinity || (v.allocated() && *v.vnf_dc == dc);
  s.p3_affinity = affinity ? 1 : 0;
  s.p4_urgency = remaining < params.t_urgency(r.deadline_steps) ? 1 : 0;
  const auto& w = params.weights;
  s.total = w[0] * s.p1_deadline + w[1] * s.p2_dc_relation + w[2] * s.p3_affinity + w[3] * s.p4_urgency;
  return s;
}

bool strictly_greater(double a, double b) {
  return a > b && (a - b) > 1e-12 * std::max(std::abs(a), std::abs(b));
}

}  // namespace

PriorityScore priority(const EngineState& state, SfcTag tag, DcId dc, const PriorityParams& params) {
  const auto& r = state.live.at(tag);
  if (dc < 0 || dc >= state.num_dcs()) throw std::out_of_range("unknown dc_id");
  PathCache paths(state.graph);
  return score(r, dc, params, paths);
}

std::optional<SfcTag> select_among(const EngineState& state, DcId dc, const std::vector<SfcTag>& candidates,
                                   const PriorityParams& params) {
  PathCache paths(state.graph);
  std::optional<SfcTag> best;
  double best_total = 0;
  for (SfcTag tag : candidates) {
    const double t = score(state.live.at(tag), dc, params, paths).total;
    if (!best || strictly_greater(t, best_total)) {
      best = tag;
      best_total = t;
    }
  }
  return best;
}

std::optional<SfcTag> select_for_allocation(const EngineState& state, DcId dc, VnfKind vtype,
                                            const PriorityParams& params) {
  return select_among(state, dc, candidate_set(state, dc, vtype), params);
}

ActionOutcome PolicyContext::apply(const PolicyAction& action) {
  switch (action.kind) {
    case PolicyAction::Kind::IdleWait: return {};
    case PolicyAction::Kind::UninstallVnf: return {engine_.uninstall(action.vtype, action.dc), std::nullopt};
    case PolicyAction::Kind::AllocateVnf: {
      if (action.dc < 0 || action.dc >= state().num_dcs()) return {ActionStatus::BadTarget, std::nullopt};
      const auto tag = select_for_allocation(state(), action.dc, action.vtype, params_);
      if (!tag) return {ActionStatus::NoCandidate, std::nullopt};
      return {engine_.allocate(*tag, action.dc), tag};
    }
  }
  return {ActionStatus::BadTarget, std::nullopt};
}

std::vector<PolicyAction> HeuristicPolicy::act(PolicyContext& ctx) {
  const EngineState& s = ctx.state();
  std::array<std::vector<SfcTag>, kNumVnfKinds> pending;
  for (const auto& [tag, r] : s.live)
    if (!r.chain.empty() && !r.chain.front().allocated()) pending[index_of(r.chain.front().vtype)].push_back(tag);

  std::vector<PolicyAction> taken;
  for (DcId dc = 0; dc < s.num_dcs(); ++dc) {
    for (VnfKind v : kAllVnfKinds) {
      auto& cands = pending[index_of(v)];
      while (!cands.empty()) {
        const auto tag = select_among(s, dc, cands, ctx.priority_params());
        if (ctx.allocate_tag(*tag, dc) != ActionStatus::Ok) break;
        taken.push_back(PolicyAction::allocate(v, dc));
        cands.erase(std::find(cands.begin(), cands.end(), *tag));
      }
    }
  }
  if (taken.empty()) taken.push_back(PolicyAction::idle());
  return taken;
}

std::vector<PolicyAction> RandomPolicy::act(PolicyContext& ctx) {
  ActionSpace space(ctx.state().num_dcs());
  const int idx = std::uniform_int_distribution<int>(0, space.size() - 1)(rng_);
  const PolicyAction a = space.decode(idx);
  ctx.apply(a);
  return {a};
}

}  // namespace sfc
