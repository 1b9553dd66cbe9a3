#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fivegsim {

using Bytes = std::vector<uint8_t>;
using BytesView = std::span<const uint8_t>;
using Tick = uint64_t;

inline Bytes to_bytes(std::string_view s) {
  return Bytes(s.begin(), s.end());
}

inline std::string to_string(BytesView b) {
  return std::string(b.begin(), b.end());
}

inline std::string hex_encode(BytesView data) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (uint8_t b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0x0f]);
  }
  return out;
}

// Returns empty on odd length or non-hex characters; callers that need to
// distinguish check the input length themselves.
inline Bytes hex_decode(std::string_view hex) {
  auto nib = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() % 2 != 0) return {};
  Bytes out;
  out.reserve(hex.size() / 2);
  for (size_t i = 0; i < hex.size(); i += 2) {
    int hi = nib(hex[i]), lo = nib(hex[i + 1]);
    if (hi < 0 || lo < 0) return {};
    out.push_back(static_cast<uint8_t>((hi << 4) | lo));
  }
  return out;
}

inline void append_bytes(Bytes& dst, BytesView src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

inline void append_u32(Bytes& dst, uint32_t v) {
  dst.push_back(static_cast<uint8_t>(v >> 24));
  dst.push_back(static_cast<uint8_t>(v >> 16));
  dst.push_back(static_cast<uint8_t>(v >> 8));
  dst.push_back(static_cast<uint8_t>(v));
}

inline void append_u64(Bytes& dst, uint64_t v) {
  append_u32(dst, static_cast<uint32_t>(v >> 32));
  append_u32(dst, static_cast<uint32_t>(v));
}

inline uint64_t read_u64(BytesView b) {
  uint64_t v = 0;
  for (size_t i = 0; i < 8 && i < b.size(); ++i) v = (v << 8) | b[i];
  return v;
}

inline Bytes u64_bytes(uint64_t v) {
  Bytes b;
  append_u64(b, v);
  return b;
}

inline bool all_digits(std::string_view s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// Public land mobile network id. mcc is always 3 digits, mnc 2 or 3.
struct Plmn {
  std::string mcc;
  std::string mnc;

  bool well_formed() const {
    return mcc.size() == 3 && all_digits(mcc) &&
           (mnc.size() == 2 || mnc.size() == 3) && all_digits(mnc);
  }
  std::string render() const { return mcc + "-" + mnc; }

  static Plmn parse(std::string_view s) {
    auto dash = s.find('-');
    if (dash == std::string_view::npos) return {};
    return Plmn{std::string(s.substr(0, dash)), std::string(s.substr(dash + 1))};
  }

  friend auto operator<=>(const Plmn&, const Plmn&) = default;
};

// Deterministic random source. splitmix64 keeps draws bit-identical across
// platforms and standard libraries; std distributions are not portable.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  uint32_t next_u32() { return static_cast<uint32_t>(next_u64() >> 32); }

  // Uniform in [0, bound). Rejection-free multiply-shift is fine here; the
  // modeled protocols only need reproducibility, not exact uniformity.
  uint64_t bounded(uint64_t bound) {
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

  Bytes bytes(size_t n) {
    Bytes out(n);
    size_t i = 0;
    while (i < n) {
      uint64_t v = next_u64();
      for (int k = 0; k < 8 && i < n; ++k, ++i) {
        out[i] = static_cast<uint8_t>(v >> (56 - 8 * k));
      }
    }
    return out;
  }

  // Derives an independent child stream; used to give each actor its own
  // source so event ordering changes cannot shift another actor's draws.
  Rng fork(uint64_t tag) { return Rng(next_u64() ^ (tag * 0x9e3779b97f4a7c15ull)); }

 private:
  uint64_t state_;
};

}  // namespace fivegsim
