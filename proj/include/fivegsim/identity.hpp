#pragma once

#include <optional>
#include <set>
#include <string>

#include "fivegsim/common.hpp"
#include "fivegsim/modgroup.hpp"
#include "fivegsim/prf.hpp"

namespace fivegsim {

// Permanent subscription identifier, IMSI-style: 3-digit mcc, 2-3 digit mnc,
// 10-digit msin. Rendered "MCC-MNC-MSIN" in every report and scenario file.
struct Supi {
  std::string mcc;
  std::string mnc;
  std::string msin;

  bool well_formed() const {
    return mcc.size() == 3 && all_digits(mcc) &&
           (mnc.size() == 2 || mnc.size() == 3) && all_digits(mnc) &&
           msin.size() == 10 && all_digits(msin);
  }
  Plmn plmn() const { return Plmn{mcc, mnc}; }
  std::string render() const { return mcc + "-" + mnc + "-" + msin; }

  static std::optional<Supi> parse(std::string_view s) {
    auto first = s.find('-');
    if (first == std::string_view::npos) return std::nullopt;
    auto second = s.find('-', first + 1);
    if (second == std::string_view::npos) return std::nullopt;
    Supi supi{std::string(s.substr(0, first)),
              std::string(s.substr(first + 1, second - first - 1)),
              std::string(s.substr(second + 1))};
    if (!supi.well_formed()) return std::nullopt;
    return supi;
  }

  friend auto operator<=>(const Supi&, const Supi&) = default;
};

enum class SuciScheme : uint8_t { Null, ProbabilisticPk };

inline std::string_view to_string(SuciScheme s) {
  return s == SuciScheme::Null ? "null" : "probabilistic-pk";
}

// Concealed identifier. Routing fields (mcc/mnc) stay cleartext for any
// observer; the msin is recoverable from `ciphertext` without a key only
// under the null scheme. Under the probabilistic scheme `ephemeral_tag`
// carries the sender's ephemeral public element.
struct Suci {
  std::string mcc;
  std::string mnc;
  SuciScheme scheme = SuciScheme::Null;
  Bytes ciphertext;
  Bytes ephemeral_tag;

  Plmn plmn() const { return Plmn{mcc, mnc}; }

  // What a radio observer sees. Null-scheme ciphertext is the raw msin digits
  // and is rendered as such; probabilistic output is rendered as hex.
  std::string render() const {
    std::string out = "scheme=" + std::string(to_string(scheme)) + " mcc=" + mcc +
                      " mnc=" + mnc;
    if (scheme == SuciScheme::Null) {
      out += " out=" + fivegsim::to_string(BytesView(ciphertext));
    } else {
      out += " eph=" + hex_encode(ephemeral_tag) + " out=" + hex_encode(ciphertext);
    }
    return out;
  }

  friend bool operator==(const Suci&, const Suci&) = default;
};

// Temporary identifier. temp_id carries no function of the msin; epoch counts
// reassignments.
struct Guti {
  Plmn plmn;
  uint32_t temp_id = 0;
  uint32_t epoch = 0;

  std::string render() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08x", temp_id);
    return plmn.render() + "/" + buf + "/e" + std::to_string(epoch);
  }
  friend auto operator<=>(const Guti&, const Guti&) = default;
};

// Home-network concealment keys as seen from one side. The USIM side holds
// only the public element for the networks in provisioned_networks; the home
// network additionally holds the private exponent.
struct HnKeyMaterial {
  std::optional<uint64_t> public_key;
  std::optional<uint64_t> private_key;
  std::set<Plmn> provisioned_networks;

  static HnKeyMaterial generate(Rng& rng) {
    HnKeyMaterial m;
    uint64_t secret = modgroup::random_secret(rng);
    m.private_key = secret;
    m.public_key = modgroup::public_of(secret);
    return m;
  }

  HnKeyMaterial usim_view() const {
    HnKeyMaterial m;
    m.public_key = public_key;
    m.provisioned_networks = provisioned_networks;
    return m;
  }

  // The "configured by the HN to use the null scheme" case: the key stays
  // provisioned for trust decisions but is withheld from concealment.
  HnKeyMaterial without_public_key() const {
    HnKeyMaterial m = *this;
    m.public_key.reset();
    return m;
  }
};

enum class DeconcealError : uint8_t { MissingPrivateKey, MalformedCiphertext };

struct DeconcealResult {
  std::optional<Supi> supi;
  std::optional<DeconcealError> error;
  bool ok() const { return supi.has_value(); }
};

namespace detail {
inline constexpr size_t kSuciMacLen = 8;

inline Bytes suci_mask(uint64_t shared, BytesView eph_pub, size_t len) {
  return default_prf().derive(u64_bytes(shared), "suci-mask", eph_pub, len);
}

inline Bytes suci_mac(uint64_t shared, BytesView eph_and_ct) {
  return default_prf().derive(u64_bytes(shared), "suci-mac", eph_and_ct, kSuciMacLen);
}
}  // namespace detail

// Conceals a SUPI. With a provisioned public key this is the probabilistic
// scheme (fresh ephemeral per call); without one the mandated fallback is the
// null scheme, whose ciphertext is the msin digits rendered as bytes.
inline Suci conceal_supi(const Supi& supi, const HnKeyMaterial& keys, Rng& rng) {
  Suci suci;
  suci.mcc = supi.mcc;
  suci.mnc = supi.mnc;
  if (!keys.public_key) {
    suci.scheme = SuciScheme::Null;
    suci.ciphertext = to_bytes(supi.msin);
    return suci;
  }
  suci.scheme = SuciScheme::ProbabilisticPk;
  uint64_t eph_secret = modgroup::random_secret(rng);
  uint64_t eph_public = modgroup::public_of(eph_secret);
  uint64_t shared = modgroup::shared_secret(*keys.public_key, eph_secret);
  suci.ephemeral_tag = u64_bytes(eph_public);
  Bytes masked = to_bytes(supi.msin);
  Bytes mask = detail::suci_mask(shared, suci.ephemeral_tag, masked.size());
  for (size_t i = 0; i < masked.size(); ++i) masked[i] ^= mask[i];
  Bytes mac_input = suci.ephemeral_tag;
  append_bytes(mac_input, masked);
  Bytes mac = detail::suci_mac(shared, mac_input);
  suci.ciphertext = masked;
  append_bytes(suci.ciphertext, mac);
  return suci;
}

inline DeconcealResult deconceal_supi(const Suci& suci, const HnKeyMaterial& keys) {
  DeconcealResult result;
  if (suci.scheme == SuciScheme::Null) {
    Supi supi{suci.mcc, suci.mnc, fivegsim::to_string(BytesView(suci.ciphertext))};
    if (!supi.well_formed()) {
      result.error = DeconcealError::MalformedCiphertext;
      return result;
    }
    result.supi = supi;
    return result;
  }
  if (!keys.private_key) {
    result.error = DeconcealError::MissingPrivateKey;
    return result;
  }
  if (suci.ciphertext.size() <= detail::kSuciMacLen || suci.ephemeral_tag.size() != 8) {
    result.error = DeconcealError::MalformedCiphertext;
    return result;
  }
  uint64_t eph_public = read_u64(suci.ephemeral_tag);
  uint64_t shared = modgroup::shared_secret(eph_public, *keys.private_key);
  size_t msin_len = suci.ciphertext.size() - detail::kSuciMacLen;
  Bytes masked(suci.ciphertext.begin(), suci.ciphertext.begin() + msin_len);
  Bytes mac(suci.ciphertext.begin() + msin_len, suci.ciphertext.end());
  Bytes mac_input = suci.ephemeral_tag;
  append_bytes(mac_input, masked);
  if (detail::suci_mac(shared, mac_input) != mac) {
    result.error = DeconcealError::MalformedCiphertext;
    return result;
  }
  Bytes mask = detail::suci_mask(shared, suci.ephemeral_tag, masked.size());
  for (size_t i = 0; i < masked.size(); ++i) masked[i] ^= mask[i];
  Supi supi{suci.mcc, suci.mnc, fivegsim::to_string(BytesView(masked))};
  if (!supi.well_formed()) {
    result.error = DeconcealError::MalformedCiphertext;
    return result;
  }
  result.supi = supi;
  return result;
}

// Reassignment rate is an operator decision; the policy is a scenario knob.
struct GutiPolicy {
  enum class Kind : uint8_t { Never, EveryRegistration, EveryNEvents };
  Kind kind = Kind::EveryRegistration;
  uint32_t n = 1;

  // `events` counts completed registrations (or other trigger events).
  bool should_reassign(uint64_t events) const {
    switch (kind) {
      case Kind::Never: return false;
      case Kind::EveryRegistration: return true;
      case Kind::EveryNEvents: return n != 0 && events % n == 0;
    }
    return false;
  }

  std::string render() const {
    switch (kind) {
      case Kind::Never: return "never";
      case Kind::EveryRegistration: return "every-registration";
      case Kind::EveryNEvents: return "every-" + std::to_string(n);
    }
    return "never";
  }

  static std::optional<GutiPolicy> parse(std::string_view s) {
    if (s == "never") return GutiPolicy{Kind::Never, 0};
    if (s == "every-registration") return GutiPolicy{Kind::EveryRegistration, 1};
    if (s.starts_with("every-")) {
      auto num = s.substr(6);
      if (!all_digits(num) || num.size() > 9) return std::nullopt;
      uint32_t n = static_cast<uint32_t>(std::stoul(std::string(num)));
      if (n == 0) return std::nullopt;
      return GutiPolicy{Kind::EveryNEvents, n};
    }
    return std::nullopt;
  }
};

inline Guti reassign_guti(const Guti& current, Rng& rng) {
  Guti next = current;
  next.temp_id = rng.next_u32();
  next.epoch = current.epoch + 1;
  return next;
}

}  // namespace fivegsim
