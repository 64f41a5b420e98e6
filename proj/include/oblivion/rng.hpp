#pragma once

// Deterministic randomness. Every operation that needs randomness takes an
// explicit 64-bit seed; identical seeds must reproduce identical outputs
// bit-for-bit, which is what makes scenario transcripts replayable.

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <random>

#include "oblivion/digest.hpp"

namespace oblivion {

using BigInt = boost::multiprecision::cpp_int;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, 2^bits).
  BigInt next_bits(unsigned bits) {
    BigInt v = 0;
    unsigned produced = 0;
    while (produced < bits) {
      unsigned take = bits - produced < 64 ? bits - produced : 64;
      std::uint64_t word = engine_();
      if (take < 64) word &= (std::uint64_t{1} << take) - 1;
      v |= BigInt(word) << produced;
      produced += take;
    }
    return v;
  }

  // Uniform odd integer with exactly `bits` significant bits.
  BigInt next_odd(unsigned bits) {
    BigInt v = next_bits(bits);
    v |= BigInt(1) << (bits - 1);
    v |= 1;
    return v;
  }

  // Uniform integer in [0, bound) by rejection sampling.
  BigInt next_below(const BigInt& bound) {
    unsigned bits = static_cast<unsigned>(boost::multiprecision::msb(bound)) + 1;
    while (true) {
      BigInt v = next_bits(bits);
      if (v < bound) return v;
    }
  }

  bool next_bool() { return (engine_() & 1u) != 0; }

 private:
  std::mt19937_64 engine_;
};

// Stable derivation of per-item seeds from a parent seed.
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
  return detail::splitmix64(parent ^ detail::rotl64(index + 1, 32));
}

}  // namespace oblivion
