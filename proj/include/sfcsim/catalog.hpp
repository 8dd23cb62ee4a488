#pragma once

#include <array>
#include <optional>
#include <vector>

#include <json.hpp>

#include "sfcsim/types.hpp"

namespace sfc {

struct VnfType {
  VnfKind kind = VnfKind::NAT;
  int vcpu = 1;
  int ram_gb = 1;
  int storage_gb = 1;
  int proc_steps = 1;

  // vCPU x RAM gives the computational power a VNF instance occupies.
  int compute_demand() const { return vcpu * ram_gb; }

  bool operator==(const VnfType&) const = default;
};

struct SfcType {
  SfcKind kind = SfcKind::CG;
  std::vector<VnfKind> chain;
  double bw_lo_mbps = 1.0;  // equal bounds mean a fixed bandwidth
  double bw_hi_mbps = 1.0;
  double e2e_ms = 1.0;
  int bundle_lo = 1;
  int bundle_hi = 1;
  // Unset means "bandwidth x 0.001", i.e. a one millisecond transmission.
  std::optional<double> packet_len_mb;

  bool ranged_bw() const { return bw_lo_mbps != bw_hi_mbps; }
  Steps deadline_steps() const;
  double packet_len_for(double bw_mbps) const { return packet_len_mb.value_or(bw_mbps * 0.001); }

  bool operator==(const SfcType&) const = default;
};

struct Catalog {
  std::array<VnfType, kNumVnfKinds> vnfs;
  std::array<SfcType, kNumSfcKinds> sfcs;

  const VnfType& vnf(VnfKind k) const { return vnfs[index_of(k)]; }
  const SfcType& sfc(SfcKind k) const { return sfcs[index_of(k)]; }

  bool operator==(const Catalog&) const = default;
};

/// The six VNF and six SFC types with their reference attribute values.
Catalog default_catalog();

/// Applies a (possibly partial) JSON override on top of default_catalog().
/// Throws ConfigError on unknown names or non-positive attributes.
Catalog load_catalog(const nlohmann::json& config);

/// Full dump; load_catalog(to_json(c)) == c.
nlohmann::json to_json(const Catalog& catalog);

/// Throws ConfigError if any type breaks its invariants.
void validate(const Catalog& catalog);

}  // namespace sfc
