#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sfc {

// One simulation step is 0.01 ms.
inline constexpr int kStepsPerMs = 100;

using DcId = int;
using FuncId = int;
using SfcTag = std::int64_t;
using Steps = std::int64_t;

enum class VnfKind : std::uint8_t { NAT, FW, VOC, TM, WO, IDPS };
enum class SfcKind : std::uint8_t { CG, AugR, VoIP, VS, MIoT, Ind40 };

inline constexpr int kNumVnfKinds = 6;
inline constexpr int kNumSfcKinds = 6;

inline constexpr std::array<VnfKind, kNumVnfKinds> kAllVnfKinds{
    VnfKind::NAT, VnfKind::FW, VnfKind::VOC, VnfKind::TM, VnfKind::WO, VnfKind::IDPS};
inline constexpr std::array<SfcKind, kNumSfcKinds> kAllSfcKinds{
    SfcKind::CG, SfcKind::AugR, SfcKind::VoIP, SfcKind::VS, SfcKind::MIoT, SfcKind::Ind40};

constexpr int index_of(VnfKind k) { return static_cast<int>(k); }
constexpr int index_of(SfcKind k) { return static_cast<int>(k); }

std::string_view to_string(VnfKind k);
std::string_view to_string(SfcKind k);

// Throw std::invalid_argument on unknown names.
VnfKind parse_vnf_kind(std::string_view name);
SfcKind parse_sfc_kind(std::string_view name);

/// Raised when an internal invariant is broken. Never expected with valid policies.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised for malformed or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sfc
