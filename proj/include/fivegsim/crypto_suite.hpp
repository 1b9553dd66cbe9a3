#pragma once

#include <optional>
#include <string>

#include "fivegsim/common.hpp"
#include "fivegsim/crypto_alg.hpp"
#include "fivegsim/keys.hpp"
#include "fivegsim/prf.hpp"

namespace fivegsim {

// Per-connection security state for one scope (NAS or AS). The two sides of a
// connection hold mirrored copies; counters advance independently per
// direction.
enum class ContextScope : uint8_t { Nas, As };
enum class ContextState : uint8_t { Absent, Partial, Active };

inline std::string_view to_string(ContextState s) {
  switch (s) {
    case ContextState::Absent: return "absent";
    case ContextState::Partial: return "partial";
    case ContextState::Active: return "active";
  }
  return "absent";
}

struct SecurityContext {
  ContextScope scope = ContextScope::Nas;
  std::string connection_id;
  std::string peer;    // endpoint on the other side of this context
  std::string bearer;  // per-connection tag (access type); a common key set
                       // still separates its connections cryptographically
  Bytes enc_key;       // 128-bit leaf
  Bytes int_key;       // 128-bit leaf
  CipherAlg cipher_alg = CipherAlg::NEA0;
  IntegrityAlg integrity_alg = IntegrityAlg::NIA0;
  uint8_t tx_direction = 0;  // 0 = uplink (UE side sends), 1 = downlink
  uint32_t tx_counter = 0;
  uint32_t rx_last = 0;
  bool rx_seen = false;
  ContextState state = ContextState::Absent;

  std::string render() const {
    return "conn=" + connection_id + " scope=" +
           (scope == ContextScope::Nas ? std::string("nas") : std::string("as")) +
           " state=" + std::string(to_string(state)) + " cipher=" +
           to_string(cipher_alg) + " integ=" + to_string(integrity_alg) +
           " tx=" + std::to_string(tx_counter) +
           " rx=" + (rx_seen ? std::to_string(rx_last) : std::string("-")) +
           " enc=" + hex_encode(enc_key) + " int=" + hex_encode(int_key) +
           " peer=" + peer;
  }
};

inline constexpr size_t kMacLen = 4;  // 32-bit tag

// Wire protection envelope. Under NEA0 the payload bytes equal the
// plaintext; under NIA0 there is no mac and no replay protection.
struct ProtectionEnvelope {
  CipherAlg cipher_alg = CipherAlg::NEA0;
  IntegrityAlg integrity_alg = IntegrityAlg::NIA0;
  uint32_t replay_counter = 0;
  std::optional<Bytes> mac;
  Bytes payload;

  std::string render_metadata() const {
    return "cipher=" + to_string(cipher_alg) + " integ=" + to_string(integrity_alg) +
           " ctr=" + std::to_string(replay_counter) +
           " len=" + std::to_string(payload.size()) +
           (mac ? " mac=" + hex_encode(*mac) : " mac=-");
  }
};

namespace detail {
// Direction and bearer are bound into mask and tag: a reflected envelope
// never verifies on the side that produced it, and an envelope from one
// connection never verifies on a sibling connection that shares the keys.
inline Bytes keystream(const SecurityContext& ctx, uint8_t direction, uint32_t counter,
                       size_t len, const Prf& prf) {
  Bytes input = to_bytes(ctx.bearer);
  input.push_back(0x00);
  input.push_back(direction);
  append_u32(input, counter);
  return prf.derive(ctx.enc_key,
                    "nea" + std::to_string(static_cast<int>(ctx.cipher_alg)) + "-mask",
                    input, len);
}

inline Bytes compute_mac(const SecurityContext& ctx, uint8_t direction, uint32_t counter,
                         BytesView payload, const Prf& prf) {
  Bytes input = to_bytes(ctx.bearer);
  input.push_back(0x00);
  input.push_back(direction);
  append_u32(input, counter);
  append_bytes(input, payload);
  return prf.derive(ctx.int_key,
                    "nia" + std::to_string(static_cast<int>(ctx.integrity_alg)) + "-mac",
                    input, kMacLen);
}
}  // namespace detail

// Applies the context's selected algorithms and advances the uplink counter.
inline ProtectionEnvelope protect(BytesView payload, SecurityContext& ctx,
                                  const Prf& prf = default_prf()) {
  ProtectionEnvelope env;
  env.cipher_alg = ctx.cipher_alg;
  env.integrity_alg = ctx.integrity_alg;
  env.replay_counter = ctx.tx_counter++;
  env.payload.assign(payload.begin(), payload.end());
  if (ctx.cipher_alg != CipherAlg::NEA0) {
    Bytes mask = detail::keystream(ctx, ctx.tx_direction, env.replay_counter,
                                   env.payload.size(), prf);
    for (size_t i = 0; i < env.payload.size(); ++i) env.payload[i] ^= mask[i];
  }
  if (ctx.integrity_alg != IntegrityAlg::NIA0) {
    env.mac = detail::compute_mac(ctx, ctx.tx_direction, env.replay_counter,
                                  env.payload, prf);
  }
  return env;
}

enum class UnprotectVerdict : uint8_t { Ok, IntegrityFailure, ReplayDetected };

inline std::string_view to_string(UnprotectVerdict v) {
  switch (v) {
    case UnprotectVerdict::Ok: return "ok";
    case UnprotectVerdict::IntegrityFailure: return "integrity-failure";
    case UnprotectVerdict::ReplayDetected: return "replay-detected";
  }
  return "ok";
}

struct UnprotectResult {
  UnprotectVerdict verdict = UnprotectVerdict::Ok;
  Bytes payload;
  bool ok() const { return verdict == UnprotectVerdict::Ok; }
};

// Verifies and strips an envelope. Under NIA0 neither tampering nor replay is
// detected and the payload is returned as-is; that is the modeled
// vulnerability, not an oversight. On any failure the caller must discard the
// message; context state is only advanced on success.
inline UnprotectResult unprotect(const ProtectionEnvelope& env, SecurityContext& ctx,
                                 const Prf& prf = default_prf()) {
  UnprotectResult result;
  uint8_t rx_direction = 1 - ctx.tx_direction;
  if (ctx.integrity_alg != IntegrityAlg::NIA0) {
    if (env.integrity_alg != ctx.integrity_alg || env.cipher_alg != ctx.cipher_alg) {
      result.verdict = UnprotectVerdict::IntegrityFailure;
      return result;
    }
    if (ctx.rx_seen && env.replay_counter <= ctx.rx_last) {
      result.verdict = UnprotectVerdict::ReplayDetected;
      return result;
    }
    Bytes expected = detail::compute_mac(ctx, rx_direction, env.replay_counter,
                                         env.payload, prf);
    if (!env.mac || *env.mac != expected) {
      result.verdict = UnprotectVerdict::IntegrityFailure;
      return result;
    }
    ctx.rx_last = env.replay_counter;
    ctx.rx_seen = true;
  }
  result.payload = env.payload;
  if (ctx.cipher_alg != CipherAlg::NEA0) {
    Bytes mask = detail::keystream(ctx, rx_direction, env.replay_counter,
                                   result.payload.size(), prf);
    for (size_t i = 0; i < result.payload.size(); ++i) result.payload[i] ^= mask[i];
  }
  return result;
}

// Network-side preference order plus the null-mode switch that the lawful
// interception requirement keeps in the standard.
struct OperatorPolicy {
  std::vector<CipherAlg> cipher_preference;
  std::vector<IntegrityAlg> integrity_preference;

  static OperatorPolicy standard(bool allow_null) {
    OperatorPolicy p;
    p.cipher_preference = {CipherAlg::NEA2, CipherAlg::NEA1};
    p.integrity_preference = {IntegrityAlg::NIA2, IntegrityAlg::NIA1};
    if (allow_null) {
      p.cipher_preference.push_back(CipherAlg::NEA0);
      p.integrity_preference.push_back(IntegrityAlg::NIA0);
    }
    return p;
  }
};

struct NegotiationResult {
  std::optional<CipherAlg> cipher;
  std::optional<IntegrityAlg> integrity;
  SecurityCapabilities replayed_caps;  // the caps the network saw, for echo
  bool ok() const { return cipher && integrity; }  // else NoCommonAlgorithm
};

// Network selects its highest-preference algorithms present in the UE caps as
// received (possibly attacker-modified in transit). The caps it saw come back
// for echo in the Security Mode Command so the UE can compare.
inline NegotiationResult negotiate(const SecurityCapabilities& ue_caps,
                                   const OperatorPolicy& policy) {
  NegotiationResult result;
  result.replayed_caps = ue_caps;
  for (CipherAlg a : policy.cipher_preference) {
    if (ue_caps.supports(a)) {
      result.cipher = a;
      break;
    }
  }
  for (IntegrityAlg a : policy.integrity_preference) {
    if (ue_caps.supports(a)) {
      result.integrity = a;
      break;
    }
  }
  return result;
}

}  // namespace fivegsim
