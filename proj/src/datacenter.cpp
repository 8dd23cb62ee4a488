#include "sfcsim/datacenter.hpp"

#include <string>

namespace sfc {

using Code = DataCenterError::Code;

DataCenter::DataCenter(DcId id, const DcSpec& spec)
    : id_(id),
      max_storage_(spec.max_storage_gb),
      max_compute_(spec.max_compute()),
      cur_storage_(spec.max_storage_gb),
      cur_compute_(spec.max_compute()) {
  if (spec.max_storage_gb < 0 || spec.cpus < 0 || spec.ram_gb < 0) throw ConfigError("negative DC capacity");
}

DataCenter::Instance& DataCenter::find(VnfKind kind, FuncId fid) {
  auto& table = installed_[index_of(kind)];
  auto it = table.find(fid);
  if (it == table.end())
    throw DataCenterError(Code::UnknownFunction, "unknown function " + std::string(to_string(kind)) + "#" +
                                                     std::to_string(fid) + " on DC " + std::to_string(id_));
  return it->second;
}

FuncId DataCenter::install_vnf(const VnfType& v) {
  if (cur_storage_ < v.storage_gb)
    throw DataCenterError(Code::InsufficientResources, "insufficient storage on DC " + std::to_string(id_));
  if (cur_compute_ < v.compute_demand())
    throw DataCenterError(Code::InsufficientResources, "insufficient compute on DC " + std::to_string(id_));
  const FuncId fid = next_func_id_++;
  installed_[index_of(v.kind)].emplace(fid, Instance{FuncStatus::Idle, v.storage_gb, v.compute_demand()});
  idle_clock_[index_of(v.kind)].emplace(fid, 0);
  cur_storage_ -= v.storage_gb;
  cur_compute_ -= v.compute_demand();
  return fid;
}

void DataCenter::uninstall_vnf(VnfKind kind, FuncId fid) {
  Instance& inst = find(kind, fid);
  if (inst.status == FuncStatus::InUse)
    throw DataCenterError(Code::FunctionInUse, "cannot uninstall an in-use function");
  cur_storage_ += inst.storage_gb;
  cur_compute_ += inst.compute;
  installed_[index_of(kind)].erase(fid);
  idle_clock_[index_of(kind)].erase(fid);
}

void DataCenter::allocate_vnf(VnfKind kind, FuncId fid) {
  Instance& inst = find(kind, fid);
  if (inst.status == FuncStatus::InUse) throw DataCenterError(Code::AlreadyInUse, "function already in use");
  inst.status = FuncStatus::InUse;
  idle_clock_[index_of(kind)].erase(fid);
}

void DataCenter::revoke_vnf(VnfKind kind, FuncId fid) {
  Instance& inst = find(kind, fid);
  if (inst.status != FuncStatus::InUse) throw DataCenterError(Code::NotInUse, "function is not in use");
  inst.status = FuncStatus::Idle;
  idle_clock_[index_of(kind)][fid] = 0;
}

void DataCenter::force_revoke_vnf(VnfKind kind, FuncId fid) {
  Instance& inst = find(kind, fid);
  inst.status = FuncStatus::Idle;
  idle_clock_[index_of(kind)][fid] = 0;
}

std::vector<std::pair<VnfKind, FuncId>> DataCenter::tick_idle(Steps t_thresh) {
  std::vector<std::pair<VnfKind, FuncId>> removed;
  for (VnfKind k : kAllVnfKinds) {
    auto& clocks = idle_clock_[index_of(k)];
    for (auto& [fid, clock] : clocks) {
      ++clock;
      if (clock >= t_thresh) removed.emplace_back(k, fid);
    }
  }
  for (auto [k, fid] : removed) uninstall_vnf(k, fid);
  return removed;
}

std::optional<FuncStatus> DataCenter::status(VnfKind k, FuncId fid) const {
  const auto& table = installed_[index_of(k)];
  auto it = table.find(fid);
  if (it == table.end()) return std::nullopt;
  return it->second.status;
}

std::optional<FuncId> DataCenter::first_idle(VnfKind k) const {
  const auto& clocks = idle_clock_[index_of(k)];
  if (clocks.empty()) return std::nullopt;
  return clocks.begin()->first;
}

std::optional<FuncId> DataCenter::longest_idle(VnfKind k) const {
  std::optional<FuncId> best;
  Steps best_clock = -1;
  for (const auto& [fid, clock] : idle_clock_[index_of(k)]) {
    if (clock > best_clock) {
      best = fid;
      best_clock = clock;
    }
  }
  return best;
}

int DataCenter::instance_count() const {
  int n = 0;
  for (const auto& t : installed_) n += static_cast<int>(t.size());
  return n;
}

void DataCenter::check_invariants() const {
  std::int64_t storage = 0;
  std::int64_t compute = 0;
  for (int k = 0; k < kNumVnfKinds; ++k) {
    std::size_t idle = 0;
    for (const auto& [fid, inst] : installed_[k]) {
      storage += inst.storage_gb;
      compute += inst.compute;
      const bool has_clock = idle_clock_[k].count(fid) != 0;
      if ((inst.status == FuncStatus::Idle) != has_clock)
        throw InvariantViolation("idle clock out of sync on DC " + std::to_string(id_));
      idle += has_clock;
    }
    if (idle != idle_clock_[k].size()) throw InvariantViolation("orphaned idle clock on DC " + std::to_string(id_));
  }
  if (cur_storage_ + storage != max_storage_ || cur_compute_ + compute != max_compute_)
    throw InvariantViolation("resource ledger mismatch on DC " + std::to_string(id_));
  if (cur_storage_ < 0 || cur_compute_ < 0) throw InvariantViolation("negative resources on DC " + std::to_string(id_));
}

}  // namespace sfc
