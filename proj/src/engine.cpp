#include "sfcsim/engine.hpp"

#include <cmath>
#include <string>

namespace sfc {

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::Inject: return "inject";
    case EventKind::Install: return "install";
    case EventKind::Allocate: return "allocate";
    case EventKind::Uninstall: return "uninstall";
    case EventKind::TxStart: return "tx_start";
    case EventKind::TxWait: return "tx_wait";
    case EventKind::TxDone: return "tx_done";
    case EventKind::VnfDone: return "vnf_done";
    case EventKind::ForceRevoke: return "force_revoke";
    case EventKind::Drop: return "drop";
    case EventKind::FinalTxStart: return "final_tx_start";
    case EventKind::FinalTxWait: return "final_tx_wait";
    case EventKind::Complete: return "complete";
    case EventKind::Reap: return "reap";
  }
  return "?";
}

std::string_view to_string(ActionStatus s) {
  switch (s) {
    case ActionStatus::Ok: return "ok";
    case ActionStatus::NoCandidate: return "no_candidate";
    case ActionStatus::NoResources: return "no_resources";
    case ActionStatus::NoIdleInstance: return "no_idle_instance";
    case ActionStatus::BadTarget: return "bad_target";
  }
  return "?";
}

Steps tx_steps(double packet_len_mb, Kbps bw, const PathResult& path, const EngineParams& params) {
  if (bw <= 0) throw std::invalid_argument("tx_steps: bandwidth must be positive");
  // packet [Mb] / bw [Mbps] read as milliseconds, 100 steps per ms.
  const double raw = kStepsPerMs * packet_len_mb * 1000.0 / static_cast<double>(bw);
  Steps steps = static_cast<Steps>(std::ceil(raw - 1e-9));
  if (steps < 0) steps = 0;
  if (params.propagation) steps += propagation_steps(path, params.fiber_km_per_s);
  return steps;
}

Engine::Engine(std::shared_ptr<const Catalog> catalog, NetworkGraph graph, const std::vector<DcSpec>& dcs,
               EngineParams params) {
  if (!catalog) throw ConfigError("engine needs a catalog");
  if (static_cast<int>(dcs.size()) != graph.num_nodes())
    throw ConfigError("DC count (" + std::to_string(dcs.size()) + ") does not match topology node count (" +
                      std::to_string(graph.num_nodes()) + ")");
  if (params.t_thresh < 1) throw ConfigError("t_thresh must be >= 1");
  state_.catalog = std::move(catalog);
  state_.params = params;
  state_.graph = std::move(graph);
  for (std::size_t i = 0; i < dcs.size(); ++i) state_.dcs.emplace_back(static_cast<DcId>(i), dcs[i]);
}

void Engine::emit(EventKind kind, SfcTag tag, DcId dc, FuncId func, int vnf, int sfc, Steps value) {
  pending_.push_back({state_.step, kind, tag, dc, func, vnf, sfc, value});
}

void Engine::inject(std::vector<SfcRecord> records) {
  for (auto& r : records) {
    if (r.chain.empty()) throw InvariantViolation("injected request with empty chain");
    if (state_.live.count(r.tag) || state_.final_tx.count(r.tag))
      throw InvariantViolation("duplicate tag " + std::to_string(r.tag));
    r.injected_at = state_.step;
    r.t_ccurr = 0;
    emit(EventKind::Inject, r.tag, r.src_dc, -1, -1, index_of(r.type), r.dest_dc);
    ++state_.generated;
    const SfcTag tag = r.tag;
    state_.live.emplace(tag, std::move(r));
  }
}

ActionStatus Engine::allocate(SfcTag tag, DcId dc) {
  if (dc < 0 || dc >= state_.num_dcs()) return ActionStatus::BadTarget;
  auto it = state_.live.find(tag);
  if (it == state_.live.end() || it->second.chain.empty()) return ActionStatus::BadTarget;
  SfcRecord& r = it->second;
  VnfState& head = r.chain.front();
  if (head.allocated()) return ActionStatus::NoCandidate;

  DataCenter& d = state_.dcs[dc];
  std::optional<FuncId> fid = d.first_idle(head.vtype);
  if (!fid) {
    const VnfType& v = state_.catalog->vnf(head.vtype);
    if (!d.can_install(v)) return ActionStatus::NoResources;
    fid = d.install_vnf(v);
    emit(EventKind::Install, -1, dc, *fid, index_of(head.vtype));
  }
  d.allocate_vnf(head.vtype, *fid);
  head.t_vcurr = 0;
  head.vnf_dc = dc;
  head.func_id = *fid;
  if (dc < 64) r.placed_dcs |= (std::uint64_t{1} << dc);
  emit(EventKind::Allocate, tag, dc, *fid, index_of(head.vtype), index_of(r.type));
  return ActionStatus::Ok;
}

ActionStatus Engine::uninstall(VnfKind kind, DcId dc) {
  if (dc < 0 || dc >= state_.num_dcs()) return ActionStatus::BadTarget;
  DataCenter& d = state_.dcs[dc];
  const auto fid = d.longest_idle(kind);
  if (!fid) return ActionStatus::NoIdleInstance;
  d.uninstall_vnf(kind, *fid);
  emit(EventKind::Uninstall, -1, dc, *fid, index_of(kind));
  return ActionStatus::Ok;
}

StepReport Engine::step() {
  auto& s = state_;
  StepReport report;
  report.step = s.step;

  // Deadline drops. Only requests still in the chain phase can be dropped.
  for (auto it = s.live.begin(); it != s.live.end();) {
    SfcRecord& r = it->second;
    if (r.t_ccurr > r.deadline_steps && !r.chain.empty()) {
      for (const VnfState& v : r.chain) {
        if (!v.allocated()) continue;
        s.dcs[*v.vnf_dc].force_revoke_vnf(v.vtype, *v.func_id);
        emit(EventKind::ForceRevoke, r.tag, *v.vnf_dc, *v.func_id, index_of(v.vtype), index_of(r.type));
      }
      if (r.tx_delay) s.graph.release_bw(r.tx_delay->path, r.bw);
      const int pending = static_cast<int>(r.chain.size());
      s.dropped.push_back({r.tag, r.type, s.step, pending});
      emit(EventKind::Drop, r.tag, r.sfc_dc, -1, -1, index_of(r.type), pending);
      ++report.dropped;
      it = s.live.erase(it);
    } else {
      ++it;
    }
  }

  // Head pass: only the first VNF of each chain is looked at.
  for (auto& [tag, r] : s.live) {
    if (!r.chain.empty()) {
      VnfState& head = r.chain.front();
      if (r.tx_delay) {
        if (--r.tx_delay->remain <= 0) {
          s.graph.release_bw(r.tx_delay->path, r.bw);
          r.tx_delay.reset();
          emit(EventKind::TxDone, tag, r.sfc_dc, -1, index_of(head.vtype), index_of(r.type));
        }
      } else if (head.allocated()) {
        if (r.sfc_dc != *head.vnf_dc) {
          const DcId to = *head.vnf_dc;
          if (auto path = s.graph.select_min_path(r.sfc_dc, to, r.bw)) {
            const Steps n = tx_steps(r.packet_len_mb, r.bw, *path, s.params);
            if (n > 0) {
              s.graph.reserve_bw(*path, r.bw);
              r.tx_delay = TxState{std::move(*path), n};
            }
            r.sfc_dc = to;
            emit(EventKind::TxStart, tag, to, -1, index_of(head.vtype), index_of(r.type), n);
          } else {
            emit(EventKind::TxWait, tag, to, -1, index_of(head.vtype), index_of(r.type));
          }
        } else if (head.t_vcurr < head.t_req - 1) {
          ++head.t_vcurr;
        } else {
          s.dcs[*head.vnf_dc].revoke_vnf(head.vtype, *head.func_id);
          emit(EventKind::VnfDone, tag, *head.vnf_dc, *head.func_id, index_of(head.vtype), index_of(r.type));
          r.chain.pop_front();
        }
      }
    }
    ++r.t_ccurr;
  }

  // Chains that just emptied (or are waiting for a route) start final TX.
  for (auto it = s.live.begin(); it != s.live.end();) {
    SfcRecord& r = it->second;
    if (!r.chain.empty()) {
      ++it;
      continue;
    }
    auto path = s.graph.select_min_path(r.sfc_dc, r.dest_dc, r.bw);
    if (!path) {
      emit(EventKind::FinalTxWait, r.tag, r.sfc_dc, -1, -1, index_of(r.type));
      ++it;
      continue;
    }
    FinalTx f;
    f.tag = r.tag;
    f.type = r.type;
    f.remain = tx_steps(r.packet_len_mb, r.bw, *path, s.params);
    if (f.remain > 0 && path->hops.size() > 1) {
      s.graph.reserve_bw(*path, r.bw);
      f.reserved = r.bw;
    }
    f.path = std::move(*path);
    f.injected_at = r.injected_at;
    f.deadline_steps = r.deadline_steps;
    emit(EventKind::FinalTxStart, r.tag, r.sfc_dc, -1, -1, index_of(r.type), f.remain);
    s.final_tx.emplace(r.tag, std::move(f));
    it = s.live.erase(it);
  }

  for (auto it = s.final_tx.begin(); it != s.final_tx.end();) {
    FinalTx& f = it->second;
    if (f.remain > 0) --f.remain;
    if (f.remain > 0) {
      ++it;
      continue;
    }
    if (f.reserved > 0) s.graph.release_bw(f.path, f.reserved);
    CompletionRecord c{f.tag, f.type, s.step - f.injected_at + 1, f.deadline_steps, s.step};
    s.done.push_back(c);
    emit(EventKind::Complete, f.tag, f.path.dest(), -1, -1, index_of(f.type), c.e2e_steps);
    ++report.completed;
    report.accepted += c.within_deadline();
    it = s.final_tx.erase(it);
  }

  for (DataCenter& d : s.dcs)
    for (auto [k, fid] : d.tick_idle(s.params.t_thresh)) emit(EventKind::Reap, -1, d.id(), fid, index_of(k));

  report.events = std::move(pending_);
  pending_.clear();
  ++s.step;
  if (s.params.check_invariants) check_invariants();
  return report;
}

void Engine::check_invariants() const {
  const auto& s = state_;
  for (const auto& d : s.dcs) d.check_invariants();

  std::vector<std::array<int, kNumVnfKinds>> in_use(s.dcs.size(), std::array<int, kNumVnfKinds>{});
  std::vector<Kbps> expected(s.graph.num_edges(), 0);
  auto charge = [&](const PathResult& p, Kbps bw) {
    for (std::size_t i = 0; i + 1 < p.hops.size(); ++i) expected[s.graph.edge_index(p.hops[i], p.hops[i + 1])] += bw;
  };

  for (const auto& [tag, r] : s.live) {
    if (s.final_tx.count(tag)) throw InvariantViolation("tag in both live and final_tx");
    if (r.t_ccurr < 0) throw InvariantViolation("negative t_ccurr");
    for (std::size_t i = 0; i < r.chain.size(); ++i) {
      const VnfState& v = r.chain[i];
      if (v.allocated() != v.vnf_dc.has_value() || v.allocated() != v.func_id.has_value())
        throw InvariantViolation("inconsistent VNF allocation fields");
      if (!v.allocated()) continue;
      if (i != 0) throw InvariantViolation("non-head VNF allocated");
      if (v.t_vcurr < 0 || v.t_vcurr >= v.t_req) throw InvariantViolation("t_vcurr out of range");
      const auto st = s.dcs[*v.vnf_dc].status(v.vtype, *v.func_id);
      if (st != FuncStatus::InUse) throw InvariantViolation("allocated VNF bound to a non in-use function");
      ++in_use[*v.vnf_dc][index_of(v.vtype)];
    }
    if (r.tx_delay) {
      if (r.tx_delay->remain <= 0) throw InvariantViolation("stale in-chain TX");
      charge(r.tx_delay->path, r.bw);
    }
  }
  for (const auto& [tag, f] : s.final_tx)
    if (f.reserved > 0) charge(f.path, f.reserved);

  for (std::size_t d = 0; d < s.dcs.size(); ++d)
    for (VnfKind k : kAllVnfKinds)
      if (s.dcs[d].in_use_count(k) != in_use[d][index_of(k)])
        throw InvariantViolation("in-use function without an owning VNF on DC " + std::to_string(d));

  for (int e = 0; e < s.graph.num_edges(); ++e) {
    const auto& edge = s.graph.edges()[e];
    if (edge.residual < 0 || edge.residual > edge.capacity) throw InvariantViolation("residual out of range");
    if (edge.capacity - edge.residual != expected[e]) throw InvariantViolation("bandwidth reservation mismatch");
  }
}

}  // namespace sfc
