#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fivegsim/common.hpp"

namespace fivegsim {

// NEA0 is null ciphering (payload stays visible), NIA0 null integrity
// (no effective tag, no replay protection).
enum class CipherAlg : uint8_t { NEA0 = 0, NEA1 = 1, NEA2 = 2 };
enum class IntegrityAlg : uint8_t { NIA0 = 0, NIA1 = 1, NIA2 = 2 };

inline std::string to_string(CipherAlg a) {
  return "NEA" + std::to_string(static_cast<int>(a));
}
inline std::string to_string(IntegrityAlg a) {
  return "NIA" + std::to_string(static_cast<int>(a));
}

inline std::optional<CipherAlg> cipher_from_string(std::string_view s) {
  if (s == "NEA0") return CipherAlg::NEA0;
  if (s == "NEA1") return CipherAlg::NEA1;
  if (s == "NEA2") return CipherAlg::NEA2;
  return std::nullopt;
}
inline std::optional<IntegrityAlg> integrity_from_string(std::string_view s) {
  if (s == "NIA0") return IntegrityAlg::NIA0;
  if (s == "NIA1") return IntegrityAlg::NIA1;
  if (s == "NIA2") return IntegrityAlg::NIA2;
  return std::nullopt;
}

// Ordered by preference, strongest first. Null algorithms appear in the sets
// only when the operator policy permits null modes.
struct SecurityCapabilities {
  std::vector<CipherAlg> ciphering;
  std::vector<IntegrityAlg> integrity;

  bool supports(CipherAlg a) const {
    return std::find(ciphering.begin(), ciphering.end(), a) != ciphering.end();
  }
  bool supports(IntegrityAlg a) const {
    return std::find(integrity.begin(), integrity.end(), a) != integrity.end();
  }

  static SecurityCapabilities standard(bool allow_null) {
    SecurityCapabilities caps;
    caps.ciphering = {CipherAlg::NEA2, CipherAlg::NEA1};
    caps.integrity = {IntegrityAlg::NIA2, IntegrityAlg::NIA1};
    if (allow_null) {
      caps.ciphering.push_back(CipherAlg::NEA0);
      caps.integrity.push_back(IntegrityAlg::NIA0);
    }
    return caps;
  }

  std::string render() const {
    std::string out = "nea=";
    for (size_t i = 0; i < ciphering.size(); ++i) {
      if (i) out += ",";
      out += to_string(ciphering[i]);
    }
    out += " nia=";
    for (size_t i = 0; i < integrity.size(); ++i) {
      if (i) out += ",";
      out += to_string(integrity[i]);
    }
    return out;
  }

  friend bool operator==(const SecurityCapabilities&, const SecurityCapabilities&) =
      default;
};

}  // namespace fivegsim
