#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sfcsim/catalog.hpp"
#include "sfcsim/types.hpp"

namespace sfc {

enum class FuncStatus : std::uint8_t { Idle, InUse };

class DataCenterError : public std::runtime_error {
 public:
  enum class Code { InsufficientResources, UnknownFunction, FunctionInUse, AlreadyInUse, NotInUse };
  DataCenterError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

struct DcSpec {
  int max_storage_gb = 2000;
  int cpus = 64;
  int ram_gb = 256;

  // Supply mirrors the demand rule: CPUs x RAM.
  std::int64_t max_compute() const { return static_cast<std::int64_t>(cpus) * ram_gb; }
  bool operator==(const DcSpec&) const = default;
};

/// Resource ledger and VNF-instance table of one datacenter.
///
/// Storage and compute are the only depletable pools. Every instance is
/// either Idle (with an idle clock) or InUse (allocated to exactly one VNF).
class DataCenter {
 public:
  struct Instance {
    FuncStatus status = FuncStatus::Idle;
    int storage_gb = 0;
    std::int64_t compute = 0;
  };
  using InstanceTable = std::map<FuncId, Instance>;
  using IdleTable = std::map<FuncId, Steps>;

  DataCenter(DcId id, const DcSpec& spec);

  DcId id() const { return id_; }
  int max_storage() const { return max_storage_; }
  std::int64_t max_compute() const { return max_compute_; }
  int cur_storage() const { return cur_storage_; }
  std::int64_t cur_compute() const { return cur_compute_; }

  bool can_install(const VnfType& v) const {
    return cur_storage_ >= v.storage_gb && cur_compute_ >= v.compute_demand();
  }

  FuncId install_vnf(const VnfType& v);
  void uninstall_vnf(VnfKind kind, FuncId fid);
  void allocate_vnf(VnfKind kind, FuncId fid);
  void revoke_vnf(VnfKind kind, FuncId fid);
  void force_revoke_vnf(VnfKind kind, FuncId fid);

  /// Advances every idle clock by one step and uninstalls instances whose
  /// clock reaches t_thresh. Returns what was removed, ordered by (kind, fid).
  std::vector<std::pair<VnfKind, FuncId>> tick_idle(Steps t_thresh);

  const InstanceTable& installed(VnfKind k) const { return installed_[index_of(k)]; }
  const IdleTable& idle(VnfKind k) const { return idle_clock_[index_of(k)]; }
  std::optional<FuncStatus> status(VnfKind k, FuncId fid) const;
  std::optional<FuncId> first_idle(VnfKind k) const;
  // Idle instance with the largest clock; ties go to the smallest id.
  std::optional<FuncId> longest_idle(VnfKind k) const;
  int idle_count(VnfKind k) const { return static_cast<int>(idle_clock_[index_of(k)].size()); }
  int in_use_count(VnfKind k) const {
    return static_cast<int>(installed_[index_of(k)].size() - idle_clock_[index_of(k)].size());
  }
  int instance_count() const;
  bool empty() const { return instance_count() == 0; }

  // Throws InvariantViolation if the ledger disagrees with the instance table.
  void check_invariants() const;

 private:
  Instance& find(VnfKind kind, FuncId fid);

  DcId id_;
  int max_storage_;
  std::int64_t max_compute_;
  int cur_storage_;
  std::int64_t cur_compute_;
  std::array<InstanceTable, kNumVnfKinds> installed_;
  std::array<IdleTable, kNumVnfKinds> idle_clock_;
  FuncId next_func_id_ = 1;
};

}  // namespace sfc
