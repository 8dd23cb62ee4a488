#include "sfcsim/request_gen.hpp"

#include <random>
#include <string>

namespace sfc {

std::vector<WaveSpec> schedule_waves(const std::vector<Steps>& wave_times) {
  std::vector<WaveSpec> plan;
  for (std::size_t i = 0; i < wave_times.size(); ++i) {
    if (wave_times[i] < 0) throw ConfigError("negative wave time");
    if (i > 0 && wave_times[i] == wave_times[i - 1])
      throw ConfigError("duplicate wave time " + std::to_string(wave_times[i]));
    if (i > 0 && wave_times[i] < wave_times[i - 1]) throw ConfigError("wave times must be sorted ascending");
    plan.push_back({wave_times[i], {}});
  }
  return plan;
}

SfcRecord make_request(const Catalog& catalog, SfcTag tag, SfcKind type, DcId src, DcId dest, double bw_mbps,
                       Steps injected_at) {
  const SfcType& st = catalog.sfc(type);
  SfcRecord r;
  r.tag = tag;
  r.type = type;
  r.src_dc = src;
  r.dest_dc = dest;
  r.bw = mbps_to_kbps(bw_mbps);
  r.packet_len_mb = st.packet_len_for(kbps_to_mbps(r.bw));
  r.e2e_ms = st.e2e_ms;
  r.deadline_steps = st.deadline_steps();
  r.injected_at = injected_at;
  r.sfc_dc = src;
  for (VnfKind k : st.chain) r.chain.push_back(VnfState{k, catalog.vnf(k).proc_steps, -1, {}, {}});
  return r;
}

std::vector<SfcRecord> generate_wave(const Catalog& catalog, int n_dcs, std::uint64_t seed, int wave_index,
                                     SfcTag first_tag, Steps injected_at, bool allow_loopback) {
  if (n_dcs < 1 || (n_dcs < 2 && !allow_loopback)) throw ConfigError("request generation needs at least 2 DCs");
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(wave_index), 0x5fc5eedU};
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<DcId> pick_dc(0, n_dcs - 1);

  std::vector<SfcRecord> out;
  SfcTag tag = first_tag;
  for (const SfcType& st : catalog.sfcs) {
    const int bundle = std::uniform_int_distribution<int>(st.bundle_lo, st.bundle_hi)(rng);
    for (int i = 0; i < bundle; ++i) {
      const DcId src = pick_dc(rng);
      DcId dest = pick_dc(rng);
      while (!allow_loopback && dest == src) dest = pick_dc(rng);
      double bw = st.bw_lo_mbps;
      if (st.ranged_bw()) bw = std::uniform_real_distribution<double>(st.bw_lo_mbps, st.bw_hi_mbps)(rng);
      out.push_back(make_request(catalog, tag++, st.kind, src, dest, bw, injected_at));
    }
  }
  return out;
}

std::vector<SfcRecord> manual_wave(const Catalog& catalog, int n_dcs, const std::vector<ManualRequest>& requests,
                                   SfcTag first_tag, Steps injected_at) {
  std::vector<SfcRecord> out;
  SfcTag tag = first_tag;
  for (const auto& m : requests) {
    if (m.src < 0 || m.src >= n_dcs || m.dest < 0 || m.dest >= n_dcs)
      throw ConfigError("manual request endpoint out of range");
    const SfcType& st = catalog.sfc(m.type);
    const double bw = m.bw_mbps.value_or(st.bw_lo_mbps);
    out.push_back(make_request(catalog, tag++, m.type, m.src, m.dest, bw, injected_at));
  }
  return out;
}

}  // namespace sfc
