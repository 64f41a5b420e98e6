#pragma once

// Bit-vector conventions shared by every module: plaintexts are vectors of
// 0/1 bytes, and multi-bit integers are little-endian (bits[0] is the LSB).

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace oblivion {

using Bit = std::uint8_t;
using BitVec = std::vector<Bit>;

inline BitVec bits_from_uint(std::uint64_t value, std::size_t width) {
  BitVec out(width);
  for (std::size_t i = 0; i < width; ++i) {
    out[i] = static_cast<Bit>((value >> i) & 1u);
  }
  return out;
}

inline std::uint64_t uint_from_bits(const BitVec& bits) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < bits.size() && i < 64; ++i) {
    v |= static_cast<std::uint64_t>(bits[i] & 1u) << i;
  }
  return v;
}

// "0110" reads index-first: character k is bits[k] (LSB first).
inline BitVec bits_from_string(const std::string& s) {
  BitVec out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '0') {
      out.push_back(0);
    } else if (c == '1') {
      out.push_back(1);
    } else {
      throw std::invalid_argument("bit string may contain only 0 and 1");
    }
  }
  return out;
}

inline std::string bits_to_string(const BitVec& bits) {
  std::string s;
  s.reserve(bits.size());
  for (Bit b : bits) s.push_back(b ? '1' : '0');
  return s;
}

inline std::string to_hex(const std::uint8_t* data, std::size_t len) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (std::size_t i = 0; i < len; ++i) {
    out.push_back(digits[data[i] >> 4]);
    out.push_back(digits[data[i] & 0xf]);
  }
  return out;
}

inline std::string to_hex(const std::vector<std::uint8_t>& data) {
  return to_hex(data.data(), data.size());
}

inline int hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

inline std::vector<std::uint8_t> from_hex(const std::string& hex) {
  if (hex.size() % 2 != 0) throw std::invalid_argument("odd-length hex string");
  std::vector<std::uint8_t> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_nibble(hex[2 * i]);
    int lo = hex_nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw std::invalid_argument("bad hex digit");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

}  // namespace oblivion
