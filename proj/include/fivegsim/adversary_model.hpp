#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fivegsim/common.hpp"
#include "fivegsim/transcript.hpp"

namespace fivegsim {

// Dolev-Yao without key compromise: the attacker observes, drops, injects and
// mutates on the radio link but never holds a subscriber root key or the HN
// private key.
struct AttackerCapabilities {
  bool can_sniff = false;
  bool can_inject_preauth = false;
  bool can_broadcast = false;
  bool can_mutate_in_transit = false;
  // Not a knob: no configuration grants the attacker key material.
  static constexpr bool knows_root_keys = false;

  std::string render() const {
    std::string out;
    auto add = [&](bool on, std::string_view name) {
      if (!on) return;
      if (!out.empty()) out += ",";
      out += name;
    };
    add(can_sniff, "sniff");
    add(can_inject_preauth, "inject_preauth");
    add(can_broadcast, "broadcast");
    add(can_mutate_in_transit, "mutate_in_transit");
    return out.empty() ? "none" : out;
  }

  bool covers(const AttackerCapabilities& needed) const {
    return (!needed.can_sniff || can_sniff) &&
           (!needed.can_inject_preauth || can_inject_preauth) &&
           (!needed.can_broadcast || can_broadcast) &&
           (!needed.can_mutate_in_transit || can_mutate_in_transit);
  }
};

enum class AttackKind : uint8_t {
  SupiCatchPassive,
  SupiCatchActive,
  PreauthDosReject,
  SilentDowngrade,
  BiddingDown,
  EmergencySupiCatch,
};

inline constexpr AttackKind kAllAttacks[] = {
    AttackKind::SupiCatchPassive, AttackKind::SupiCatchActive,
    AttackKind::PreauthDosReject, AttackKind::SilentDowngrade,
    AttackKind::BiddingDown,      AttackKind::EmergencySupiCatch,
};

inline std::string_view to_string(AttackKind k) {
  switch (k) {
    case AttackKind::SupiCatchPassive: return "supi_catch_passive";
    case AttackKind::SupiCatchActive: return "supi_catch_active";
    case AttackKind::PreauthDosReject: return "preauth_dos_reject";
    case AttackKind::SilentDowngrade: return "silent_downgrade";
    case AttackKind::BiddingDown: return "bidding_down";
    case AttackKind::EmergencySupiCatch: return "emergency_supi_catch";
  }
  return "?";
}

inline std::optional<AttackKind> attack_from_string(std::string_view s) {
  for (AttackKind k : kAllAttacks) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

// Catalog cross-reference ids used in reports; stable strings.
inline std::string_view catalog_ref(AttackKind k) {
  switch (k) {
    case AttackKind::SupiCatchPassive: return "T3R1";
    case AttackKind::SupiCatchActive: return "T3R1";
    case AttackKind::EmergencySupiCatch: return "T3R1";
    case AttackKind::PreauthDosReject: return "T3R2";
    case AttackKind::SilentDowngrade: return "T3R3";
    case AttackKind::BiddingDown: return "T1-bidding";
  }
  return "?";
}

inline AttackerCapabilities required_capabilities(AttackKind k) {
  AttackerCapabilities c;
  switch (k) {
    case AttackKind::SupiCatchPassive:
      c.can_sniff = true;
      break;
    case AttackKind::SupiCatchActive:
      c.can_sniff = c.can_broadcast = c.can_inject_preauth = true;
      break;
    case AttackKind::PreauthDosReject:
      c.can_broadcast = c.can_inject_preauth = true;
      break;
    case AttackKind::SilentDowngrade:
      c.can_broadcast = c.can_inject_preauth = true;
      break;
    case AttackKind::BiddingDown:
      c.can_sniff = c.can_mutate_in_transit = true;
      break;
    case AttackKind::EmergencySupiCatch:
      c.can_sniff = c.can_inject_preauth = true;
      break;
  }
  return c;
}

enum class Verdict : uint8_t { Success, Fail };

inline std::string_view to_string(Verdict v) {
  return v == Verdict::Success ? "SUCCESS" : "FAIL";
}

// One piece of machine-checkable evidence: a transcript line number plus the
// substring that proves the claim on that line.
struct Evidence {
  size_t transcript_line = 0;  // 1-based
  std::string claim;           // substring that must appear on that line
  std::string description;
};

struct AttackOutcome {
  AttackKind attack = AttackKind::SupiCatchPassive;
  std::string config_fingerprint;
  Verdict verdict = Verdict::Fail;
  std::vector<Evidence> evidence;  // non-empty iff verdict == Success
};

// The attacker's knowledge of a run: exactly what its sniffer captured —
// observed radio transmissions and raw exposures (clear bodies in full,
// protected bodies as envelope metadata).
inline std::vector<std::string> sniffer_view(const Transcript& transcript) {
  std::vector<std::string> lines;
  for (const auto& e : transcript.events()) {
    if (e.kind == Transcript::EventKind::Observe ||
        e.kind == Transcript::EventKind::Expose) {
      lines.push_back(Transcript::render_line(e));
    }
  }
  return lines;
}

// Re-validates an outcome against the raw transcript: every cited line must
// exist and contain the claimed substring, and a SUCCESS verdict must cite at
// least one line. Kept separate from evidence extraction so a buggy or lying
// extractor cannot certify itself.
inline bool validate_evidence(const AttackOutcome& outcome,
                              const Transcript& transcript) {
  if (outcome.verdict == Verdict::Success && outcome.evidence.empty()) return false;
  for (const auto& ev : outcome.evidence) {
    std::string line = transcript.line(ev.transcript_line);
    if (line.empty()) return false;
    if (line.find(ev.claim) == std::string::npos) return false;
  }
  return true;
}

}  // namespace fivegsim
