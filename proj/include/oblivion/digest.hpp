#pragma once

// Deterministic 256-bit mixing digest used for key fingerprints, subject
// attributes, hash-to-scalar in the toy signature scheme, and transcript
// state digests. It is NOT a cryptographic hash; it only has to be stable,
// well-distributed, and sensitive to every input byte, in line with the
// toy crypto layer it serves.

#include <array>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "oblivion/bits.hpp"

namespace oblivion {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t rotl64(std::uint64_t v, int r) {
  return (v << r) | (v >> (64 - r));
}

}  // namespace detail

using Digest256 = std::array<std::uint8_t, 32>;

inline Digest256 digest256(const std::uint8_t* data, std::size_t len) {
  // Four independent FNV-style lanes with distinct odd multipliers,
  // cross-mixed and finalized with splitmix64.
  std::uint64_t lane[4];
  for (int i = 0; i < 4; ++i) {
    lane[i] = detail::splitmix64(0xa5a5a5a5a5a5a5a5ull * (i + 1) ^ len);
  }
  static const std::uint64_t mult[4] = {
      0x100000001b3ull, 0x9ddfea08eb382d69ull | 1ull,
      0xc2b2ae3d27d4eb4full, 0x165667b19e3779f9ull,
  };
  for (std::size_t i = 0; i < len; ++i) {
    for (int j = 0; j < 4; ++j) {
      lane[j] = (lane[j] ^ data[i]) * mult[j];
    }
    if ((i & 31u) == 31u) {
      std::uint64_t t = lane[0];
      lane[0] ^= detail::rotl64(lane[1], 13);
      lane[1] ^= detail::rotl64(lane[2], 29);
      lane[2] ^= detail::rotl64(lane[3], 41);
      lane[3] ^= detail::rotl64(t, 7);
    }
  }
  for (int round = 0; round < 2; ++round) {
    std::uint64_t t = lane[0];
    lane[0] = detail::splitmix64(lane[0] ^ detail::rotl64(lane[1], 17));
    lane[1] = detail::splitmix64(lane[1] ^ detail::rotl64(lane[2], 23));
    lane[2] = detail::splitmix64(lane[2] ^ detail::rotl64(lane[3], 31));
    lane[3] = detail::splitmix64(lane[3] ^ detail::rotl64(t, 11));
  }
  Digest256 out;
  for (int j = 0; j < 4; ++j) {
    for (int b = 0; b < 8; ++b) {
      out[j * 8 + b] = static_cast<std::uint8_t>(lane[j] >> (8 * b));
    }
  }
  return out;
}

inline Digest256 digest256(const std::vector<std::uint8_t>& data) {
  return digest256(data.data(), data.size());
}

inline Digest256 digest256(const std::string& data) {
  return digest256(reinterpret_cast<const std::uint8_t*>(data.data()), data.size());
}

// 128-bit truncation of digest256; identifies eval and auth key pairs.
struct Fingerprint {
  std::array<std::uint8_t, 16> bytes{};

  bool operator==(const Fingerprint&) const = default;

  std::string hex() const { return to_hex(bytes.data(), bytes.size()); }

  static Fingerprint of(const std::string& serialized) {
    Digest256 d = digest256(serialized);
    Fingerprint fp;
    std::memcpy(fp.bytes.data(), d.data(), fp.bytes.size());
    return fp;
  }

  static Fingerprint from_hex(const std::string& hex) {
    auto raw = oblivion::from_hex(hex);
    if (raw.size() != 16) throw std::invalid_argument("fingerprint must be 16 bytes");
    Fingerprint fp;
    std::memcpy(fp.bytes.data(), raw.data(), 16);
    return fp;
  }
};

inline std::string digest_hex(const Digest256& d) {
  return to_hex(d.data(), d.size());
}

}  // namespace oblivion
