#pragma once

#include <bit>
#include <cstdint>
#include <string_view>

#include "fivegsim/common.hpp"

namespace fivegsim {

// Plain SHA-256 (FIPS 180-4). Self-contained so the library stays header-only;
// checked against the published test vectors in the unit suite.
class Sha256 {
 public:
  Sha256() { reset(); }

  void reset() {
    state_ = {0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u, 0xa54ff53au,
              0x510e527fu, 0x9b05688cu, 0x1f83d9abu, 0x5be0cd19u};
    buffer_len_ = 0;
    total_len_ = 0;
  }

  void update(BytesView data) {
    total_len_ += data.size();
    for (uint8_t b : data) {
      buffer_[buffer_len_++] = b;
      if (buffer_len_ == 64) {
        compress(buffer_.data());
        buffer_len_ = 0;
      }
    }
  }

  std::array<uint8_t, 32> finish() {
    uint64_t bit_len = total_len_ * 8;
    uint8_t pad = 0x80;
    update(BytesView(&pad, 1));
    uint8_t zero = 0x00;
    while (buffer_len_ != 56) update(BytesView(&zero, 1));
    for (int i = 7; i >= 0; --i) {
      uint8_t b = static_cast<uint8_t>(bit_len >> (8 * i));
      update(BytesView(&b, 1));
    }
    std::array<uint8_t, 32> out{};
    for (int i = 0; i < 8; ++i) {
      out[4 * i + 0] = static_cast<uint8_t>(state_[i] >> 24);
      out[4 * i + 1] = static_cast<uint8_t>(state_[i] >> 16);
      out[4 * i + 2] = static_cast<uint8_t>(state_[i] >> 8);
      out[4 * i + 3] = static_cast<uint8_t>(state_[i]);
    }
    return out;
  }

  static std::array<uint8_t, 32> digest(BytesView data) {
    Sha256 h;
    h.update(data);
    return h.finish();
  }

 private:
  static constexpr std::array<uint32_t, 64> k_ = {
      0x428a2f98u, 0x71374491u, 0xb5c0fbcfu, 0xe9b5dba5u, 0x3956c25bu,
      0x59f111f1u, 0x923f82a4u, 0xab1c5ed5u, 0xd807aa98u, 0x12835b01u,
      0x243185beu, 0x550c7dc3u, 0x72be5d74u, 0x80deb1feu, 0x9bdc06a7u,
      0xc19bf174u, 0xe49b69c1u, 0xefbe4786u, 0x0fc19dc6u, 0x240ca1ccu,
      0x2de92c6fu, 0x4a7484aau, 0x5cb0a9dcu, 0x76f988dau, 0x983e5152u,
      0xa831c66du, 0xb00327c8u, 0xbf597fc7u, 0xc6e00bf3u, 0xd5a79147u,
      0x06ca6351u, 0x14292967u, 0x27b70a85u, 0x2e1b2138u, 0x4d2c6dfcu,
      0x53380d13u, 0x650a7354u, 0x766a0abbu, 0x81c2c92eu, 0x92722c85u,
      0xa2bfe8a1u, 0xa81a664bu, 0xc24b8b70u, 0xc76c51a3u, 0xd192e819u,
      0xd6990624u, 0xf40e3585u, 0x106aa070u, 0x19a4c116u, 0x1e376c08u,
      0x2748774cu, 0x34b0bcb5u, 0x391c0cb3u, 0x4ed8aa4au, 0x5b9cca4fu,
      0x682e6ff3u, 0x748f82eeu, 0x78a5636fu, 0x84c87814u, 0x8cc70208u,
      0x90befffau, 0xa4506cebu, 0xbef9a3f7u, 0xc67178f2u};

  void compress(const uint8_t* block) {
    uint32_t w[64];
    for (int i = 0; i < 16; ++i) {
      w[i] = (uint32_t(block[4 * i]) << 24) | (uint32_t(block[4 * i + 1]) << 16) |
             (uint32_t(block[4 * i + 2]) << 8) | uint32_t(block[4 * i + 3]);
    }
    for (int i = 16; i < 64; ++i) {
      uint32_t s0 = std::rotr(w[i - 15], 7) ^ std::rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
      uint32_t s1 = std::rotr(w[i - 2], 17) ^ std::rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
      w[i] = w[i - 16] + s0 + w[i - 7] + s1;
    }
    uint32_t a = state_[0], b = state_[1], c = state_[2], d = state_[3];
    uint32_t e = state_[4], f = state_[5], g = state_[6], h = state_[7];
    for (int i = 0; i < 64; ++i) {
      uint32_t s1 = std::rotr(e, 6) ^ std::rotr(e, 11) ^ std::rotr(e, 25);
      uint32_t ch = (e & f) ^ (~e & g);
      uint32_t t1 = h + s1 + ch + k_[i] + w[i];
      uint32_t s0 = std::rotr(a, 2) ^ std::rotr(a, 13) ^ std::rotr(a, 22);
      uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
      uint32_t t2 = s0 + maj;
      h = g; g = f; f = e; e = d + t1;
      d = c; c = b; b = a; a = t1 + t2;
    }
    state_[0] += a; state_[1] += b; state_[2] += c; state_[3] += d;
    state_[4] += e; state_[5] += f; state_[6] += g; state_[7] += h;
  }

  std::array<uint32_t, 8> state_;
  std::array<uint8_t, 64> buffer_;
  size_t buffer_len_ = 0;
  uint64_t total_len_ = 0;
};

inline std::array<uint8_t, 32> hmac_sha256(BytesView key, BytesView msg) {
  std::array<uint8_t, 64> block{};
  if (key.size() > 64) {
    auto folded = Sha256::digest(key);
    std::copy(folded.begin(), folded.end(), block.begin());
  } else {
    std::copy(key.begin(), key.end(), block.begin());
  }
  std::array<uint8_t, 64> ipad, opad;
  for (int i = 0; i < 64; ++i) {
    ipad[i] = block[i] ^ 0x36;
    opad[i] = block[i] ^ 0x5c;
  }
  Sha256 inner;
  inner.update(BytesView(ipad.data(), ipad.size()));
  inner.update(msg);
  auto inner_digest = inner.finish();
  Sha256 outer;
  outer.update(BytesView(opad.data(), opad.size()));
  outer.update(BytesView(inner_digest.data(), inner_digest.size()));
  return outer.finish();
}

// Keyed pseudorandom function used for every derivation edge, keystream mask
// and tag in the model. Pluggable; HMAC-SHA256 in counter mode is the default.
class Prf {
 public:
  virtual ~Prf() = default;
  virtual Bytes derive(BytesView key, std::string_view label, BytesView data,
                       size_t out_len) const = 0;
};

class HmacSha256Prf final : public Prf {
 public:
  Bytes derive(BytesView key, std::string_view label, BytesView data,
               size_t out_len) const override {
    Bytes out;
    out.reserve(out_len);
    uint32_t counter = 0;
    while (out.size() < out_len) {
      Bytes msg;
      append_bytes(msg, to_bytes(label));
      msg.push_back(0x00);  // separates label from data
      append_bytes(msg, data);
      append_u32(msg, counter++);
      auto block = hmac_sha256(key, msg);
      size_t take = std::min<size_t>(block.size(), out_len - out.size());
      out.insert(out.end(), block.begin(), block.begin() + take);
    }
    return out;
  }
};

inline const Prf& default_prf() {
  static const HmacSha256Prf instance;
  return instance;
}

// Short stable hash for fingerprints, state hashes and transcript digests.
inline std::string short_hash(BytesView data, size_t hex_chars = 16) {
  auto d = Sha256::digest(data);
  return hex_encode(BytesView(d.data(), d.size())).substr(0, hex_chars);
}

inline std::string short_hash(std::string_view s, size_t hex_chars = 16) {
  return short_hash(BytesView(reinterpret_cast<const uint8_t*>(s.data()), s.size()),
                    hex_chars);
}

}  // namespace fivegsim
