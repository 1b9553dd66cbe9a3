#pragma once

#include <cstdint>

#include "fivegsim/common.hpp"
#include "fivegsim/prf.hpp"

namespace fivegsim::modgroup {

// Fixed multiplicative group for the modeled asymmetric primitives: a 64-bit
// safe prime p = 2q + 1 with g generating the prime-order-q subgroup. Strong
// enough to keep every simulated party honest; not intended as real crypto.
inline constexpr uint64_t kPrime = 0x7fffffffffffee27ull;
inline constexpr uint64_t kOrder = 0x3ffffffffffff713ull;  // (p - 1) / 2
inline constexpr uint64_t kGenerator = 4;

inline uint64_t mulmod(uint64_t a, uint64_t b, uint64_t m) {
  return static_cast<uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline uint64_t powmod(uint64_t base, uint64_t exp, uint64_t m) {
  uint64_t result = 1;
  base %= m;
  while (exp > 0) {
    if (exp & 1) result = mulmod(result, base, m);
    base = mulmod(base, base, m);
    exp >>= 1;
  }
  return result;
}

// Secret exponent in [2, q); public element g^x mod p.
inline uint64_t random_secret(Rng& rng) { return 2 + rng.bounded(kOrder - 2); }

inline uint64_t public_of(uint64_t secret) {
  return powmod(kGenerator, secret, kPrime);
}

inline uint64_t shared_secret(uint64_t their_public, uint64_t my_secret) {
  return powmod(their_public, my_secret, kPrime);
}

// Maps arbitrary bytes into a nonzero exponent mod q.
inline uint64_t hash_to_scalar(BytesView data) {
  auto d = Sha256::digest(data);
  uint64_t v = read_u64(BytesView(d.data(), 8)) % kOrder;
  return v == 0 ? 1 : v;
}

// Schnorr-style signature in the modeled group. The nonce is derived from the
// private key and message, so signing is deterministic.
struct Signature {
  uint64_t challenge = 0;  // e = H(r || m) mod q
  uint64_t response = 0;   // s = k + e*x mod q
};

inline Signature sign(uint64_t private_key, BytesView msg) {
  Bytes nonce_input = u64_bytes(private_key);
  append_bytes(nonce_input, msg);
  uint64_t k = hash_to_scalar(nonce_input);
  uint64_t r = powmod(kGenerator, k, kPrime);
  Bytes chal_input = u64_bytes(r);
  append_bytes(chal_input, msg);
  uint64_t e = hash_to_scalar(chal_input);
  uint64_t s = (k + static_cast<unsigned __int128>(e) * private_key % kOrder) % kOrder;
  return Signature{e, s};
}

inline bool verify(uint64_t public_key, BytesView msg, const Signature& sig) {
  if (sig.challenge == 0 || sig.challenge >= kOrder || sig.response >= kOrder)
    return false;
  // r' = g^s * y^(-e); y has order q so y^(q-e) is the inverse power.
  uint64_t r = mulmod(powmod(kGenerator, sig.response, kPrime),
                      powmod(public_key, kOrder - sig.challenge, kPrime), kPrime);
  Bytes chal_input = u64_bytes(r);
  append_bytes(chal_input, msg);
  return hash_to_scalar(chal_input) == sig.challenge;
}

}  // namespace fivegsim::modgroup
