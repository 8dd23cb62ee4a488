#pragma once

#include <map>
#include <memory>
#include <string_view>
#include <vector>

#include "sfcsim/catalog.hpp"
#include "sfcsim/datacenter.hpp"
#include "sfcsim/request_gen.hpp"
#include "sfcsim/topology.hpp"
#include "sfcsim/types.hpp"

namespace sfc {

struct EngineParams {
  Steps t_thresh = 500;
  bool propagation = true;
  double fiber_km_per_s = kFiberKmPerSecond;
  // Run the full invariant check after every step (slow; used by tests).
  bool check_invariants = false;

  bool operator==(const EngineParams&) const = default;
};

/// A request whose chain is done and whose packet is travelling to dest_dc.
struct FinalTx {
  SfcTag tag = 0;
  SfcKind type = SfcKind::CG;
  PathResult path;
  Kbps reserved = 0;  // bandwidth held on path (0 when nothing was reserved)
  Steps remain = 0;
  Steps injected_at = 0;
  Steps deadline_steps = 0;
};

struct CompletionRecord {
  SfcTag tag = 0;
  SfcKind type = SfcKind::CG;
  Steps e2e_steps = 0;
  Steps deadline_steps = 0;
  Steps completed_at = 0;

  bool within_deadline() const { return e2e_steps <= deadline_steps; }
};

struct DropRecord {
  SfcTag tag = 0;
  SfcKind type = SfcKind::CG;
  Steps drop_step = 0;
  int pending = 0;
};

enum class EventKind : std::uint8_t {
  Inject,
  Install,
  Allocate,
  Uninstall,
  TxStart,
  TxWait,
  TxDone,
  VnfDone,
  ForceRevoke,
  Drop,
  FinalTxStart,
  FinalTxWait,
  Complete,
  Reap,
};

std::string_view to_string(EventKind k);

/// One trace record. Fields that do not apply are -1.
struct TraceEvent {
  Steps step = 0;
  EventKind kind = EventKind::Inject;
  SfcTag tag = -1;
  DcId dc = -1;
  FuncId func = -1;
  int vnf = -1;    // VnfKind index
  int sfc = -1;    // SfcKind index
  Steps value = -1;  // kind-specific: TX steps, e2e steps, pending VNFs

  bool operator==(const TraceEvent&) const = default;
};

struct StepReport {
  Steps step = 0;
  std::vector<TraceEvent> events;
  int completed = 0;  // finished final TX this step
  int accepted = 0;   // completed within deadline
  int dropped = 0;    // dropped by the deadline pass
};

struct EngineState {
  Steps step = 0;
  std::shared_ptr<const Catalog> catalog;
  EngineParams params;
  NetworkGraph graph;
  std::vector<DataCenter> dcs;
  std::map<SfcTag, SfcRecord> live;
  std::map<SfcTag, FinalTx> final_tx;
  std::vector<CompletionRecord> done;
  std::vector<DropRecord> dropped;
  std::int64_t generated = 0;

  int num_dcs() const { return static_cast<int>(dcs.size()); }
  bool idle() const { return live.empty() && final_tx.empty(); }
};

enum class ActionStatus : std::uint8_t { Ok, NoCandidate, NoResources, NoIdleInstance, BadTarget };

std::string_view to_string(ActionStatus s);

/// TX duration in steps: ceil(100 * packet_len / bw) plus propagation when enabled.
Steps tx_steps(double packet_len_mb, Kbps bw, const PathResult& path, const EngineParams& params);

/// Per-step simulation core.
///
/// Each step runs, in order: the deadline drop pass, the head-of-chain pass
/// (in-chain TX, processing, revoke on completion), the completion pass that
/// starts final packet TX, the final-TX pass, and idle reaping on every DC.
class Engine {
 public:
  Engine(std::shared_ptr<const Catalog> catalog, NetworkGraph graph, const std::vector<DcSpec>& dcs,
         EngineParams params = {});

  const EngineState& state() const { return state_; }
  Steps now() const { return state_.step; }

  void inject(std::vector<SfcRecord> records);

  /// Binds the head VNF of `tag` to an idle instance on `dc`, installing one if
  /// none is idle. Failures leave the state untouched.
  ActionStatus allocate(SfcTag tag, DcId dc);
  /// Removes the longest-idle instance of `kind` on `dc`.
  ActionStatus uninstall(VnfKind kind, DcId dc);

  StepReport step();

  // Throws InvariantViolation on any broken runtime invariant.
  void check_invariants() const;

 private:
  void emit(EventKind kind, SfcTag tag = -1, DcId dc = -1, FuncId func = -1, int vnf = -1, int sfc = -1,
            Steps value = -1);

  EngineState state_;
  std::vector<TraceEvent> pending_;
};

}  // namespace sfc
