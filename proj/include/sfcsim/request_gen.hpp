#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "sfcsim/catalog.hpp"
#include "sfcsim/topology.hpp"
#include "sfcsim/types.hpp"

namespace sfc {

/// Progress of one VNF in a request's chain. t_vcurr == -1 means unallocated.
struct VnfState {
  VnfKind vtype = VnfKind::NAT;
  Steps t_req = 0;
  Steps t_vcurr = -1;
  std::optional<DcId> vnf_dc;
  std::optional<FuncId> func_id;

  bool allocated() const { return t_vcurr != -1; }
  bool operator==(const VnfState&) const = default;
};

struct TxState {
  PathResult path;
  Steps remain = 0;
  bool operator==(const TxState&) const = default;
};

/// Live state of one request while its chain is being processed.
struct SfcRecord {
  SfcTag tag = 0;
  SfcKind type = SfcKind::CG;
  DcId src_dc = 0;
  DcId dest_dc = 0;
  Kbps bw = 0;
  double packet_len_mb = 0;
  double e2e_ms = 0;
  Steps deadline_steps = 0;
  Steps injected_at = 0;
  Steps t_ccurr = 0;
  DcId sfc_dc = 0;
  std::deque<VnfState> chain;
  std::optional<TxState> tx_delay;
  std::uint64_t placed_dcs = 0;  // bit d set once any VNF of this request was allocated on DC d

  Steps remaining_steps() const { return deadline_steps - t_ccurr; }
  bool placed_on(DcId d) const { return d < 64 && ((placed_dcs >> d) & 1U) != 0; }
  bool operator==(const SfcRecord&) const = default;
};

/// An explicitly listed request (manual mode).
struct ManualRequest {
  SfcKind type = SfcKind::CG;
  DcId src = 0;
  DcId dest = 0;
  std::optional<double> bw_mbps;
  bool operator==(const ManualRequest&) const = default;
};

struct WaveSpec {
  Steps at = 0;
  // Empty means "sample bundles from the catalog".
  std::vector<ManualRequest> manual;
  bool operator==(const WaveSpec&) const = default;
};

/// Wave times must be strictly ascending; throws ConfigError otherwise.
std::vector<WaveSpec> schedule_waves(const std::vector<Steps>& wave_times);

/// Builds one request from explicit parameters (chain initialised, unallocated).
SfcRecord make_request(const Catalog& catalog, SfcTag tag, SfcKind type, DcId src, DcId dest, double bw_mbps,
                       Steps injected_at);

/// Samples one wave: per SFC type a bundle size uniform in its range, then for
/// each request distinct random endpoints (unless allow_loopback). Tags are
/// first_tag, first_tag+1, ... Pure function of its arguments.
std::vector<SfcRecord> generate_wave(const Catalog& catalog, int n_dcs, std::uint64_t seed, int wave_index,
                                     SfcTag first_tag, Steps injected_at, bool allow_loopback = false);

std::vector<SfcRecord> manual_wave(const Catalog& catalog, int n_dcs, const std::vector<ManualRequest>& requests,
                                   SfcTag first_tag, Steps injected_at);

}  // namespace sfc
