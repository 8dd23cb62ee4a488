#include "sfcsim/catalog.hpp"

#include <cmath>
#include <string>

namespace sfc {

using nlohmann::json;

Steps SfcType::deadline_steps() const { return std::llround(e2e_ms * kStepsPerMs); }

Catalog default_catalog() {
  using V = VnfKind;
  Catalog c;
  c.vnfs = {{
      {V::NAT, 1, 4, 7, 6},
      {V::FW, 9, 5, 1, 3},
      {V::VOC, 5, 11, 13, 11},
      {V::TM, 13, 7, 7, 7},
      {V::WO, 5, 2, 5, 8},
      {V::IDPS, 11, 15, 2, 2},
  }};
  c.sfcs = {{
      {SfcKind::CG, {V::NAT, V::FW, V::VOC, V::WO, V::IDPS}, 4, 4, 80, 40, 55, {}},
      {SfcKind::AugR, {V::NAT, V::FW, V::TM, V::VOC, V::IDPS}, 100, 100, 10, 1, 4, {}},
      {SfcKind::VoIP, {V::NAT, V::FW, V::TM, V::FW, V::NAT}, 0.064, 0.064, 100, 100, 200, {}},
      {SfcKind::VS, {V::NAT, V::FW, V::TM, V::VOC, V::IDPS}, 4, 4, 100, 50, 100, {}},
      {SfcKind::MIoT, {V::NAT, V::FW, V::IDPS}, 1, 50, 5, 10, 15, {}},
      {SfcKind::Ind40, {V::NAT, V::FW}, 70, 70, 8, 1, 4, {}},
  }};
  return c;
}

void validate(const Catalog& catalog) {
  for (const auto& v : catalog.vnfs) {
    if (v.vcpu <= 0 || v.ram_gb <= 0 || v.storage_gb <= 0 || v.proc_steps <= 0)
      throw ConfigError("non-positive attribute on VNF type " + std::string(to_string(v.kind)));
  }
  for (const auto& s : catalog.sfcs) {
    const std::string name(to_string(s.kind));
    if (s.chain.empty()) throw ConfigError("empty chain for SFC type " + name);
    if (!(s.e2e_ms > 0)) throw ConfigError("non-positive e2e_ms for SFC type " + name);
    if (!(s.bw_lo_mbps > 0) || !(s.bw_hi_mbps >= s.bw_lo_mbps))
      throw ConfigError("invalid bandwidth for SFC type " + name);
    if (s.bundle_lo < 1 || s.bundle_hi < s.bundle_lo)
      throw ConfigError("invalid bundle range for SFC type " + name);
    if (s.packet_len_mb && *s.packet_len_mb < 0)
      throw ConfigError("negative packet_len_mb for SFC type " + name);
  }
}

namespace {

int positive_int(const json& j, const char* key, int current) {
  if (!j.contains(key)) return current;
  const auto v = j.at(key).get<int>();
  if (v <= 0) throw ConfigError(std::string("non-positive attribute: ") + key);
  return v;
}

std::pair<int, int> int_range(const json& j) {
  if (j.is_number_integer()) return {j.get<int>(), j.get<int>()};
  if (j.is_array() && j.size() == 2) return {j[0].get<int>(), j[1].get<int>()};
  throw ConfigError("expected integer or [lo, hi] range");
}

std::pair<double, double> real_range(const json& j) {
  if (j.is_number()) return {j.get<double>(), j.get<double>()};
  if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
  throw ConfigError("expected number or [lo, hi] range");
}

}  // namespace

Catalog load_catalog(const json& config) {
  Catalog c = default_catalog();
  if (config.is_null()) return c;
  if (!config.is_object()) throw ConfigError("catalog section must be an object");
  try {
    if (config.contains("vnfs")) {
      for (const auto& [name, body] : config.at("vnfs").items()) {
        VnfType& v = c.vnfs[index_of(parse_vnf_kind(name))];
        v.vcpu = positive_int(body, "vcpu", v.vcpu);
        v.ram_gb = positive_int(body, "ram_gb", v.ram_gb);
        v.storage_gb = positive_int(body, "storage_gb", v.storage_gb);
        v.proc_steps = positive_int(body, "proc_steps", v.proc_steps);
        if (body.contains("compute_demand") && body.at("compute_demand").get<int>() != v.compute_demand())
          throw ConfigError("compute_demand must equal vcpu x ram_gb for " + name);
      }
    }
    if (config.contains("sfcs")) {
      for (const auto& [name, body] : config.at("sfcs").items()) {
        SfcType& s = c.sfcs[index_of(parse_sfc_kind(name))];
        if (body.contains("chain")) {
          s.chain.clear();
          for (const auto& e : body.at("chain")) s.chain.push_back(parse_vnf_kind(e.get<std::string>()));
        }
        if (body.contains("bandwidth_mbps")) std::tie(s.bw_lo_mbps, s.bw_hi_mbps) = real_range(body.at("bandwidth_mbps"));
        if (body.contains("e2e_ms")) s.e2e_ms = body.at("e2e_ms").get<double>();
        if (body.contains("bundle")) std::tie(s.bundle_lo, s.bundle_hi) = int_range(body.at("bundle"));
        if (body.contains("packet_len_mb")) {
          const auto& p = body.at("packet_len_mb");
          if (p.is_null())
            s.packet_len_mb.reset();
          else
            s.packet_len_mb = p.get<double>();
        }
      }
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("catalog: ") + e.what());
  }
  validate(c);
  return c;
}

json to_json(const Catalog& catalog) {
  json out;
  for (const auto& v : catalog.vnfs) {
    out["vnfs"][std::string(to_string(v.kind))] = {
        {"vcpu", v.vcpu}, {"ram_gb", v.ram_gb}, {"storage_gb", v.storage_gb}, {"proc_steps", v.proc_steps}};
  }
  for (const auto& s : catalog.sfcs) {
    json chain = json::array();
    for (auto k : s.chain) chain.push_back(std::string(to_string(k)));
    json body = {{"chain", chain},
                 {"bandwidth_mbps", s.ranged_bw() ? json::array({s.bw_lo_mbps, s.bw_hi_mbps}) : json(s.bw_lo_mbps)},
                 {"e2e_ms", s.e2e_ms},
                 {"bundle", json::array({s.bundle_lo, s.bundle_hi})},
                 {"packet_len_mb", s.packet_len_mb ? json(*s.packet_len_mb) : json(nullptr)}};
    out["sfcs"][std::string(to_string(s.kind))] = std::move(body);
  }
  return out;
}

}  // namespace sfc
