#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sfcsim/engine.hpp"

namespace sfc {

struct PolicyAction {
  enum class Kind : std::uint8_t { AllocateVnf, UninstallVnf, IdleWait };
  Kind kind = Kind::IdleWait;
  VnfKind vtype = VnfKind::NAT;  // ignored for IdleWait
  DcId dc = 0;                   // ignored for IdleWait

  static PolicyAction allocate(VnfKind v, DcId d) { return {Kind::AllocateVnf, v, d}; }
  static PolicyAction uninstall(VnfKind v, DcId d) { return {Kind::UninstallVnf, v, d}; }
  static PolicyAction idle() { return {}; }

  bool operator==(const PolicyAction& o) const {
    return kind == o.kind && (kind == Kind::IdleWait || (vtype == o.vtype && dc == o.dc));
  }
};

std::string to_string(const PolicyAction& a);

/// Dense indexing of the action set: {Allocate, Uninstall} x VNF type x DC, then IdleWait.
class ActionSpace {
 public:
  explicit ActionSpace(int n_dcs) : n_dcs_(n_dcs) {}
  int size() const { return 2 * kNumVnfKinds * n_dcs_ + 1; }
  int idle_index() const { return size() - 1; }
  PolicyAction decode(int index) const;
  int encode(const PolicyAction& a) const;

 private:
  int n_dcs_;
};

struct PriorityParams {
  std::array<double, 4> weights{1.0, 1.0, 1.0, 1.0};
  // T_urgency as a fraction of each type's deadline.
  double urgency_fraction = 0.2;

  Steps t_urgency(Steps deadline_steps) const;
  bool operator==(const PriorityParams&) const = default;
};

struct PriorityScore {
  double p1_deadline = 0;
  double p2_dc_relation = 0;
  double p3_affinity = 0;
  double p4_urgency = 0;
  double total = 0;
};

/// Live tags whose head VNF has type `vtype` and is still unallocated, ascending.
std::vector<SfcTag> candidate_set(const EngineState& state, DcId dc, VnfKind vtype);

/// Four-criterion score of placing `tag`'s head VNF on `dc`.
/// Throws std::out_of_range for unknown tags.
PriorityScore priority(const EngineState& state, SfcTag tag, DcId dc, const PriorityParams& params);

/// Argmax of priority().total over candidate_set; ties go to the smallest tag.
std::optional<SfcTag> select_for_allocation(const EngineState& state, DcId dc, VnfKind vtype,
                                            const PriorityParams& params);
/// Same, over an explicit ascending candidate list.
std::optional<SfcTag> select_among(const EngineState& state, DcId dc, const std::vector<SfcTag>& candidates,
                                   const PriorityParams& params);

struct ActionOutcome {
  ActionStatus status = ActionStatus::Ok;
  std::optional<SfcTag> tag;  // the request served by an AllocateVnf
  bool ok() const { return status == ActionStatus::Ok; }
};

/// The only handle a policy gets on the engine: read-only state plus the
/// three actions. Invalid requests come back as a status, never as a throw.
class PolicyContext {
 public:
  PolicyContext(Engine& engine, const PriorityParams& params) : engine_(engine), params_(params) {}

  const EngineState& state() const { return engine_.state(); }
  const PriorityParams& priority_params() const { return params_; }

  ActionOutcome apply(const PolicyAction& action);
  // Allocation with an explicit request, bypassing priority points.
  ActionStatus allocate_tag(SfcTag tag, DcId dc) { return engine_.allocate(tag, dc); }

 private:
  Engine& engine_;
  const PriorityParams& params_;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  /// Called every T_Model steps while requests are in flight. Returns the actions taken.
  virtual std::vector<PolicyAction> act(PolicyContext& ctx) = 0;
  virtual void observe(const StepReport&) {}
  virtual void end_episode(const EngineState&) {}
};

/// First-fit benchmark: for each DC in ascending order and each VNF type,
/// serve pending heads by priority points while an idle instance exists or
/// one can be installed. Stateless; never uninstalls.
class HeuristicPolicy final : public Policy {
 public:
  std::string name() const override { return "heuristic"; }
  std::vector<PolicyAction> act(PolicyContext& ctx) override;
};

/// One uniformly random action per invocation.
class RandomPolicy final : public Policy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : rng_(seed) {}
  std::string name() const override { return "random"; }
  std::vector<PolicyAction> act(PolicyContext& ctx) override;

 private:
  std::mt19937_64 rng_;
};

}  // namespace sfc
