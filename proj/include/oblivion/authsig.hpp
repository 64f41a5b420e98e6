#pragma once

// Authentication key pairs and sign/verify over raw message bytes.
//
// The reference scheme is a deterministic discrete-log signature (Schnorr
// shape) over a fixed 256-bit safe-prime group with generator 2. It is a
// toy: parameters are far below production strength and the hash is not
// cryptographic. The interface — keygen from seed, sign bytes, verify
// bytes — is what the protocols depend on, and a production scheme drops
// in behind it.
//
// What gets signed is always an exact byte string; the canonical envelope
// encoding lives here so senders and verifiers agree bit-for-bit:
//
//   type_tag (1 byte) || field count (2 bytes BE) || [len (4 bytes BE) || field]*

#include <cstdint>
#include <initializer_list>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "oblivion/digest.hpp"
#include "oblivion/errors.hpp"
#include "oblivion/rng.hpp"

namespace oblivion {

using Bytes = std::string;  // byte container; may hold NULs

// 256-bit safe prime (p = 2q+1 with q prime, p ≡ 7 mod 8) so that g = 2
// generates the order-q subgroup of quadratic residues.
inline const BigInt& auth_group_p() {
  static const BigInt p("0xc1981a6de5af3b3e1121347cbabcd42d861b95dc6cac5dfc1263e56db4a6bdcf");
  return p;
}

inline const BigInt& auth_group_q() {
  static const BigInt q("0x60cc0d36f2d79d9f08909a3e5d5e6a16c30dcaee36562efe0931f2b6da535ee7");
  return q;
}

inline constexpr unsigned kAuthGroupBytes = 32;

inline Bytes bigint_to_fixed_bytes(const BigInt& v, unsigned width) {
  Bytes out(width, '\0');
  BigInt t = v;
  for (unsigned i = 0; i < width && t != 0; ++i) {
    out[width - 1 - i] = static_cast<char>(static_cast<std::uint8_t>(t & 0xff));
    t >>= 8;
  }
  return out;
}

inline BigInt bigint_from_fixed_bytes(const Bytes& b) {
  BigInt v = 0;
  for (unsigned char c : b) v = (v << 8) | c;
  return v;
}

struct AuthPublicKey {
  BigInt y;  // g^x mod p
  Fingerprint fingerprint;

  bool operator==(const AuthPublicKey& o) const { return y == o.y; }
};

struct AuthSecretKey {
  BigInt x;  // scalar in [1, q-1]
};

struct AuthKeyPair {
  AuthPublicKey public_key;
  AuthSecretKey secret_key;
  std::string principal_id;
};

// ---- Auth key file format ----
//
//   OBLIVION-AUTHKEY v1
//   <hex big integer per line>  (public: y; secret file: x then y)

inline std::string serialize_auth_public(const AuthPublicKey& pk) {
  std::ostringstream out;
  out << "OBLIVION-AUTHKEY v1\n" << std::hex << pk.y << "\n";
  return out.str();
}

inline std::string serialize_auth_secret(const AuthKeyPair& kp) {
  std::ostringstream out;
  out << "OBLIVION-AUTHKEY v1\n" << std::hex << kp.secret_key.x << "\n" << kp.public_key.y
      << "\n";
  return out.str();
}

namespace detail {

inline std::vector<BigInt> parse_authkey_lines(const std::string& text, std::size_t expect) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "OBLIVION-AUTHKEY v1") {
    throw ParseError("missing auth key header", 1);
  }
  std::vector<BigInt> ints;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      ints.push_back(BigInt("0x" + line));
    } catch (const std::exception&) {
      throw ParseError("bad hex integer", lineno);
    }
  }
  if (ints.size() != expect) {
    throw ParseError("expected " + std::to_string(expect) + " key integers, got " +
                     std::to_string(ints.size()), lineno);
  }
  return ints;
}

}  // namespace detail

inline AuthPublicKey parse_auth_public(const std::string& text) {
  AuthPublicKey pk;
  pk.y = detail::parse_authkey_lines(text, 1)[0];
  pk.fingerprint = Fingerprint::of(serialize_auth_public(pk));
  return pk;
}

inline AuthKeyPair parse_auth_secret(const std::string& text, std::string principal_id = {}) {
  auto ints = detail::parse_authkey_lines(text, 2);
  AuthKeyPair kp;
  kp.secret_key.x = ints[0];
  kp.public_key.y = ints[1];
  kp.public_key.fingerprint = Fingerprint::of(serialize_auth_public(kp.public_key));
  kp.principal_id = std::move(principal_id);
  return kp;
}

// ---- Keygen / sign / verify ----

inline AuthKeyPair auth_keygen(std::uint64_t seed, std::string principal_id = {}) {
  Rng rng(seed);
  AuthKeyPair kp;
  kp.secret_key.x = 1 + rng.next_below(auth_group_q() - 1);
  kp.public_key.y = boost::multiprecision::powm(BigInt(2), kp.secret_key.x, auth_group_p());
  kp.public_key.fingerprint = Fingerprint::of(serialize_auth_public(kp.public_key));
  kp.principal_id = std::move(principal_id);
  return kp;
}

namespace detail {

// Domain-separated hash to a scalar mod q: digest over
// tag byte || [u32 BE len || field]* interpreted big-endian.
inline BigInt hash_to_scalar(std::uint8_t tag, std::initializer_list<const Bytes*> fields) {
  Bytes buf(1, static_cast<char>(tag));
  for (const Bytes* f : fields) {
    std::uint32_t n = static_cast<std::uint32_t>(f->size());
    for (int s = 24; s >= 0; s -= 8) buf.push_back(static_cast<char>((n >> s) & 0xff));
    buf += *f;
  }
  Digest256 d = digest256(buf);
  BigInt v = 0;
  for (std::uint8_t byte : d) v = (v << 8) | byte;
  return v % auth_group_q();
}

}  // namespace detail

// Deterministic signature: nonce k is derived from the secret and the
// message, so fixed (key, message) yields fixed bytes. Output is
// e (32 bytes BE) || s (32 bytes BE).
inline Bytes sign(const AuthSecretKey& sk, const Bytes& message) {
  const BigInt& p = auth_group_p();
  const BigInt& q = auth_group_q();
  Bytes x_bytes = bigint_to_fixed_bytes(sk.x, kAuthGroupBytes);
  BigInt k = detail::hash_to_scalar(0x01, {&x_bytes, &message});
  if (k == 0) k = 1;
  BigInt r = boost::multiprecision::powm(BigInt(2), k, p);
  Bytes r_bytes = bigint_to_fixed_bytes(r, kAuthGroupBytes);
  BigInt y = boost::multiprecision::powm(BigInt(2), sk.x, p);
  Bytes y_bytes = bigint_to_fixed_bytes(y, kAuthGroupBytes);
  BigInt e = detail::hash_to_scalar(0x02, {&r_bytes, &y_bytes, &message});
  BigInt s = (k + e * sk.x) % q;
  return bigint_to_fixed_bytes(e, kAuthGroupBytes) + bigint_to_fixed_bytes(s, kAuthGroupBytes);
}

inline bool verify(const AuthPublicKey& pk, const Bytes& message, const Bytes& signature) {
  if (signature.size() != 2 * kAuthGroupBytes) return false;
  const BigInt& p = auth_group_p();
  const BigInt& q = auth_group_q();
  BigInt e = bigint_from_fixed_bytes(signature.substr(0, kAuthGroupBytes));
  BigInt s = bigint_from_fixed_bytes(signature.substr(kAuthGroupBytes));
  if (e >= q || s >= q) return false;
  if (pk.y <= 1 || pk.y >= p) return false;
  // R' = g^s * y^(-e) = g^s * y^(q-e) since y has order q.
  BigInt neg_e = (q - e) % q;
  BigInt gs = boost::multiprecision::powm(BigInt(2), s, p);
  BigInt ye = boost::multiprecision::powm(pk.y, neg_e, p);
  BigInt r = (gs * ye) % p;
  Bytes r_bytes = bigint_to_fixed_bytes(r, kAuthGroupBytes);
  Bytes y_bytes = bigint_to_fixed_bytes(pk.y, kAuthGroupBytes);
  return detail::hash_to_scalar(0x02, {&r_bytes, &y_bytes, &message}) == e;
}

struct SignedMessage {
  Bytes payload;        // exact bytes that were signed
  std::string signer;   // principal id
  Bytes signature;

  bool operator==(const SignedMessage&) const = default;
};

inline SignedMessage sign_message(const AuthKeyPair& kp, Bytes payload) {
  SignedMessage sm;
  sm.signature = sign(kp.secret_key, payload);
  sm.payload = std::move(payload);
  sm.signer = kp.principal_id;
  return sm;
}

// ---- Canonical envelope encoding ----

inline Bytes encode_envelope(std::uint8_t type_tag, const std::vector<Bytes>& fields) {
  if (fields.size() > 0xffff) throw InvalidParams("too many envelope fields");
  Bytes out(1, static_cast<char>(type_tag));
  std::uint16_t count = static_cast<std::uint16_t>(fields.size());
  out.push_back(static_cast<char>((count >> 8) & 0xff));
  out.push_back(static_cast<char>(count & 0xff));
  for (const Bytes& f : fields) {
    std::uint32_t n = static_cast<std::uint32_t>(f.size());
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<char>((n >> s) & 0xff));
    out += f;
  }
  return out;
}

inline std::pair<std::uint8_t, std::vector<Bytes>> decode_envelope(const Bytes& data) {
  if (data.size() < 3) throw ParseError("envelope truncated", 0);
  std::uint8_t tag = static_cast<std::uint8_t>(data[0]);
  std::size_t count = (static_cast<std::uint8_t>(data[1]) << 8) |
                      static_cast<std::uint8_t>(data[2]);
  std::vector<Bytes> fields;
  fields.reserve(count);
  std::size_t pos = 3;
  for (std::size_t i = 0; i < count; ++i) {
    if (pos + 4 > data.size()) throw ParseError("envelope field header truncated", 0);
    std::uint32_t n = 0;
    for (int j = 0; j < 4; ++j) n = (n << 8) | static_cast<std::uint8_t>(data[pos + j]);
    pos += 4;
    if (pos + n > data.size()) throw ParseError("envelope field body truncated", 0);
    fields.push_back(data.substr(pos, n));
    pos += n;
  }
  if (pos != data.size()) throw ParseError("envelope has trailing bytes", 0);
  return {tag, std::move(fields)};
}

}  // namespace oblivion
