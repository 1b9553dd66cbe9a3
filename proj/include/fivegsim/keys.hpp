#pragma once

#include <optional>
#include <string>

#include "fivegsim/common.hpp"
#include "fivegsim/crypto_alg.hpp"
#include "fivegsim/prf.hpp"

namespace fivegsim {

inline constexpr size_t kRootKeyLen = 32;   // 256-bit internal keys
inline constexpr size_t kLeafKeyLen = 16;   // 128-bit leaf keys

// Long-term key K. Lives in exactly two places, the ARPF record and the USIM
// record, bit-identical for a legitimate subscriber.
struct RootKey {
  Bytes k;

  bool well_formed() const { return k.size() == kRootKeyLen; }
  static RootKey from_hex(std::string_view hex) { return RootKey{hex_decode(hex)}; }
  friend bool operator==(const RootKey&, const RootKey&) = default;
};

struct DerivationContext {
  std::string serving_network;  // rendered PLMN of the serving network
  uint32_t run_counter = 0;     // authentication run
  CipherAlg cipher_alg = CipherAlg::NEA2;
  IntegrityAlg integrity_alg = IntegrityAlg::NIA2;

  Bytes encode() const {
    Bytes b = to_bytes(serving_network);
    b.push_back(0x00);
    append_u32(b, run_counter);
    b.push_back(static_cast<uint8_t>(cipher_alg));
    b.push_back(static_cast<uint8_t>(integrity_alg));
    return b;
  }
  friend bool operator==(const DerivationContext&, const DerivationContext&) = default;
};

// One authentication run's worth of keys, mirrored between the UE and the
// network side. The chain is root -> k_ausf -> k_seaf -> k_amf ->
// {nas leaves, k_gnb} -> {rrc/up leaves}; a model of the 3GPP framework, not
// a bit-exact reproduction of it.
struct KeyHierarchy {
  Bytes k_ausf, k_seaf, k_amf, k_gnb;             // 256-bit
  Bytes nas_enc, nas_int;                          // 128-bit
  Bytes rrc_enc, rrc_int, up_enc, up_int;          // 128-bit
  DerivationContext context;

  friend bool operator==(const KeyHierarchy&, const KeyHierarchy&) = default;

  std::string render_hex() const {
    std::string out;
    out += "k_ausf = " + hex_encode(k_ausf) + "\n";
    out += "k_seaf = " + hex_encode(k_seaf) + "\n";
    out += "k_amf = " + hex_encode(k_amf) + "\n";
    out += "k_gnb = " + hex_encode(k_gnb) + "\n";
    out += "nas_enc = " + hex_encode(nas_enc) + "\n";
    out += "nas_int = " + hex_encode(nas_int) + "\n";
    out += "rrc_enc = " + hex_encode(rrc_enc) + "\n";
    out += "rrc_int = " + hex_encode(rrc_int) + "\n";
    out += "up_enc = " + hex_encode(up_enc) + "\n";
    out += "up_int = " + hex_encode(up_int) + "\n";
    return out;
  }
};

// Deterministic derivation. The full context is bound into the first edge, so
// hierarchies from contexts that differ in any field share no key anywhere
// down the chain.
inline KeyHierarchy derive_hierarchy(const RootKey& root, const DerivationContext& ctx,
                                     const Prf& prf = default_prf()) {
  KeyHierarchy h;
  h.context = ctx;
  Bytes ctx_bytes = ctx.encode();
  h.k_ausf = prf.derive(root.k, "kdf-k_ausf", ctx_bytes, kRootKeyLen);
  h.k_seaf = prf.derive(h.k_ausf, "kdf-k_seaf", {}, kRootKeyLen);
  h.k_amf = prf.derive(h.k_seaf, "kdf-k_amf", {}, kRootKeyLen);
  h.k_gnb = prf.derive(h.k_amf, "kdf-k_gnb", {}, kRootKeyLen);
  h.nas_enc = prf.derive(h.k_amf, "kdf-nas-enc", {}, kLeafKeyLen);
  h.nas_int = prf.derive(h.k_amf, "kdf-nas-int", {}, kLeafKeyLen);
  h.rrc_enc = prf.derive(h.k_gnb, "kdf-rrc-enc", {}, kLeafKeyLen);
  h.rrc_int = prf.derive(h.k_gnb, "kdf-rrc-int", {}, kLeafKeyLen);
  h.up_enc = prf.derive(h.k_gnb, "kdf-up-enc", {}, kLeafKeyLen);
  h.up_int = prf.derive(h.k_gnb, "kdf-up-int", {}, kLeafKeyLen);
  return h;
}

enum class RederiveError : uint8_t { NoActiveNasConnection };

struct RederiveResult {
  std::optional<KeyHierarchy> hierarchy;
  std::optional<RederiveError> error;
  bool ok() const { return hierarchy.has_value(); }
};

// Network-initiated rederivation, allowed as often as the operator decides
// while an active NAS connection exists. Bumps the run counter; old leaves
// are never reused for new traffic.
inline RederiveResult rederive_on_demand(const RootKey& root, const KeyHierarchy& current,
                                         bool active_nas_connection,
                                         const Prf& prf = default_prf()) {
  RederiveResult result;
  if (!active_nas_connection) {
    result.error = RederiveError::NoActiveNasConnection;
    return result;
  }
  DerivationContext next = current.context;
  next.run_counter += 1;
  result.hierarchy = derive_hierarchy(root, next, prf);
  return result;
}

}  // namespace fivegsim
