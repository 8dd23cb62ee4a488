#include "sfcsim/types.hpp"

namespace sfc {

namespace {
constexpr std::array<std::string_view, kNumVnfKinds> kVnfNames{"NAT", "FW", "VOC", "TM", "WO", "IDPS"};
constexpr std::array<std::string_view, kNumSfcKinds> kSfcNames{"CG", "AugR", "VoIP", "VS", "MIoT", "Ind4.0"};
}  // namespace

std::string_view to_string(VnfKind k) { return kVnfNames[index_of(k)]; }
std::string_view to_string(SfcKind k) { return kSfcNames[index_of(k)]; }

VnfKind parse_vnf_kind(std::string_view name) {
  for (int i = 0; i < kNumVnfKinds; ++i)
    if (kVnfNames[i] == name) return static_cast<VnfKind>(i);
  throw std::invalid_argument("unknown VNF type: " + std::string(name));
}

SfcKind parse_sfc_kind(std::string_view name) {
  for (int i = 0; i < kNumSfcKinds; ++i)
    if (kSfcNames[i] == name) return static_cast<SfcKind>(i);
  // Accept the spelling without the dot as well.
  if (name == "Ind40") return SfcKind::Ind40;
  throw std::invalid_argument("unknown SFC type: " + std::string(name));
}

}  // namespace sfc
