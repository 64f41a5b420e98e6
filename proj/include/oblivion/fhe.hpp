#pragma once

// Pluggable bit-level homomorphic encryption.
//
// Two backends ship:
//   * clear — a transparent pass-through whose "ciphertext" is the plaintext
//     bit. It exists to isolate protocol logic bugs from crypto bugs and to
//     give exhaustive sweeps an unlimited multiplicative depth.
//   * toy — a somewhat-homomorphic scheme over the integers: the secret key
//     is a large odd p, a bit m encrypts as m + 2r + (random subset sum of
//     public encryptions of zero) mod x0, and decryption is (c mod p) mod 2.
//     XOR is addition, AND is multiplication, both modulo the noise-free
//     public element x0 = q0*p.
//
// The toy scheme is NOT secure at these parameters and is not meant to be;
// it exposes the depth/noise contract the protocols must respect. Noise is
// tracked as a conservative static bit estimate per gate. Decrypting past
// the budget yields an undefined result, not an error, matching how real
// schemes fail.

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "oblivion/circuit.hpp"
#include "oblivion/digest.hpp"
#include "oblivion/errors.hpp"
#include "oblivion/rng.hpp"

namespace oblivion {

enum class BackendId : std::uint8_t { Clear = 0, Toy = 1 };

inline const char* backend_name(BackendId id) {
  return id == BackendId::Clear ? "clear" : "toy";
}

inline BackendId backend_from_name(const std::string& name) {
  if (name == "clear") return BackendId::Clear;
  if (name == "toy") return BackendId::Toy;
  throw InvalidParams("unknown backend '" + name + "'");
}

inline constexpr int kInfiniteNoiseBudget = std::numeric_limits<std::int32_t>::max();

struct SchemeParams {
  unsigned secret_bits = 0;   // bit-length of the secret odd integer
  unsigned noise_bits = 0;    // bit-length of fresh noise terms
  unsigned pk_elements = 0;   // count of public encryptions of zero
  unsigned max_mult_depth = 0;

  bool operator==(const SchemeParams&) const = default;

  // Largest noise estimate (in bits) that still decrypts: noise must stay
  // under p/2 and p has secret_bits bits.
  int noise_cap() const { return static_cast<int>(secret_bits) - 2; }

  // Worst-case fresh noise: m + 2r + sum of pk_elements terms 2*r_i is
  // below 2^(noise_bits+1) * (pk_elements+1).
  int fresh_noise_bits() const {
    unsigned level = pk_elements + 1;
    int extra = 0;
    while (level > 0) {
      level >>= 1;
      ++extra;
    }
    return static_cast<int>(noise_bits) + 1 + extra;
  }

  void validate() const {
    if (secret_bits == 0 || noise_bits == 0 || pk_elements == 0) {
      throw InvalidParams("scheme params must be positive");
    }
    if (secret_bits <= noise_bits + 2) {
      throw InvalidParams("secret_bits must exceed noise_bits + 2");
    }
  }

  // Largest d such that a balanced AND-tree of depth d over fresh
  // ciphertexts keeps its worst-case noise estimate under the cap.
  unsigned derive_max_mult_depth() const {
    int fresh = fresh_noise_bits();
    unsigned d = 0;
    while ((std::int64_t{fresh} << (d + 1)) <= noise_cap()) ++d;
    return d;
  }
};

// Per-key evaluation context shared by all ciphertexts under that key; the
// toy backend reduces every gate result modulo x0 so values stay bounded.
struct EvalContext {
  BigInt modulus;
  int noise_cap = 0;
};

struct EvalPublicKey {
  BackendId backend = BackendId::Clear;
  SchemeParams params;
  std::vector<BigInt> elements;  // toy: x0 then pk_elements encryptions of zero
  Fingerprint fingerprint;
  std::shared_ptr<const EvalContext> ctx;
};

struct EvalSecretKey {
  BackendId backend = BackendId::Clear;
  SchemeParams params;
  BigInt secret;
  Fingerprint fingerprint;
};

struct EvalKeyPair {
  EvalPublicKey public_key;
  EvalSecretKey secret_key;

  const Fingerprint& fingerprint() const { return public_key.fingerprint; }
};

struct Ciphertext {
  BigInt value;
  int noise_budget = 0;
  Fingerprint key_fingerprint;
  BackendId backend_id = BackendId::Clear;
  std::shared_ptr<const EvalContext> ctx;

  bool operator==(const Ciphertext& o) const {
    return value == o.value && noise_budget == o.noise_budget &&
           key_fingerprint == o.key_fingerprint && backend_id == o.backend_id;
  }
};

inline std::string bigint_to_hex(const BigInt& v) {
  std::ostringstream out;
  out << std::hex << v;
  return out.str();
}

inline BigInt bigint_from_hex(const std::string& hex) {
  if (hex.empty()) throw ParseError("empty hex integer");
  for (char c : hex) {
    if (hex_nibble(c) < 0) throw ParseError("bad hex integer '" + hex + "'");
  }
  return BigInt("0x" + hex);
}

// ---- Key file format ----
//
//   OBLIVION-EVALKEY v1; params=<secret_bits>,<noise_bits>,<pk_elements>
//   <one hex big integer per line>
//
// The public file lists every public element; the secret file holds the
// single secret integer. Fingerprints are digests of the canonical public
// serialization.

namespace detail {

inline std::string evalkey_header(const SchemeParams& p) {
  return "OBLIVION-EVALKEY v1; params=" + std::to_string(p.secret_bits) + "," +
         std::to_string(p.noise_bits) + "," + std::to_string(p.pk_elements);
}

inline SchemeParams parse_evalkey_header(const std::string& line) {
  const std::string magic = "OBLIVION-EVALKEY v1; params=";
  if (line.rfind(magic, 0) != 0) throw ParseError("missing eval key header", 1);
  std::istringstream in(line.substr(magic.size()));
  SchemeParams p;
  char c1 = 0, c2 = 0;
  if (!(in >> p.secret_bits >> c1 >> p.noise_bits >> c2 >> p.pk_elements) ||
      c1 != ',' || c2 != ',') {
    throw ParseError("bad eval key params", 1);
  }
  p.validate();
  return p;
}

}  // namespace detail

inline std::string serialize_eval_public(const EvalPublicKey& pk) {
  std::string out = detail::evalkey_header(pk.params) + "\n";
  for (const BigInt& e : pk.elements) out += bigint_to_hex(e) + "\n";
  return out;
}

// The secret file carries the secret integer first, then every public
// element, so a decryptor can recompute the key fingerprint without the
// public file alongside.
inline std::string serialize_eval_secret(const EvalKeyPair& kp) {
  std::string out = detail::evalkey_header(kp.secret_key.params) + "\n" +
                    bigint_to_hex(kp.secret_key.secret) + "\n";
  for (const BigInt& e : kp.public_key.elements) out += bigint_to_hex(e) + "\n";
  return out;
}

// ---- Ciphertext list format ----
//
// One ciphertext per line: `<hex value> <decimal noise budget> <fingerprint hex>`.

inline std::string serialize_ciphertexts(std::span<const Ciphertext> cts) {
  std::string out;
  for (const Ciphertext& ct : cts) {
    out += bigint_to_hex(ct.value) + " " + std::to_string(ct.noise_budget) + " " +
           ct.key_fingerprint.hex() + "\n";
  }
  return out;
}

inline std::vector<Ciphertext> parse_ciphertexts(const std::string& text, BackendId backend,
                                                 const EvalPublicKey* key_ctx = nullptr) {
  std::vector<Ciphertext> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string value_hex, fp_hex;
    long long budget = 0;
    if (!(ls >> value_hex >> budget >> fp_hex)) {
      throw ParseError("bad ciphertext line", lineno);
    }
    Ciphertext ct;
    try {
      ct.value = bigint_from_hex(value_hex);
      ct.key_fingerprint = Fingerprint::from_hex(fp_hex);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineno);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), lineno);
    }
    ct.noise_budget = static_cast<int>(budget);
    ct.backend_id = backend;
    if (key_ctx != nullptr) ct.ctx = key_ctx->ctx;
    out.push_back(std::move(ct));
  }
  return out;
}

// ---- Backend interface ----

class FheBackend {
 public:
  virtual ~FheBackend() = default;

  virtual BackendId id() const = 0;
  virtual SchemeParams default_params() const = 0;
  virtual EvalKeyPair keygen(const SchemeParams& params, std::uint64_t seed) const = 0;
  virtual Ciphertext encrypt_bit(const EvalPublicKey& pk, Bit bit, std::uint64_t seed) const = 0;
  virtual Bit decrypt_bit(const EvalSecretKey& sk, const Ciphertext& ct) const = 0;
  virtual Ciphertext eval_xor(const Ciphertext& a, const Ciphertext& b) const = 0;
  virtual Ciphertext eval_and(const Ciphertext& a, const Ciphertext& b) const = 0;
  virtual Ciphertext eval_not(const EvalPublicKey& pk, const Ciphertext& a) const = 0;
  // Noiseless encryption of a publicly known constant; used for CONST gates.
  virtual Ciphertext trivial_bit(const EvalPublicKey& pk, Bit bit) const = 0;

  // The decryption function as a circuit over (secret key bits ++ ciphertext
  // value bits), when it fits the depth budget; nullopt otherwise. Shapes
  // the homomorphic re-encryption strategy.
  virtual std::optional<Circuit> decryption_circuit() const { return std::nullopt; }

  // Gate-by-gate homomorphic evaluation of `func`. The depth guard is
  // static: it fires before any gate is touched.
  std::vector<Ciphertext> evaluate(const EvalPublicKey& pk, const Circuit& func,
                                   std::span<const Ciphertext> inputs) const {
    if (inputs.size() != func.num_inputs) {
      throw ArityMismatch("evaluate: circuit expects " + std::to_string(func.num_inputs) +
                          " inputs, got " + std::to_string(inputs.size()));
    }
    if (mult_depth(func) > pk.params.max_mult_depth) {
      throw DepthExceeded("circuit mult depth " + std::to_string(mult_depth(func)) +
                          " exceeds max " + std::to_string(pk.params.max_mult_depth));
    }
    for (const Ciphertext& ct : inputs) {
      if (!(ct.key_fingerprint == pk.fingerprint)) {
        throw KeyMismatch("evaluate: input ciphertext under a different key");
      }
    }
    std::vector<Ciphertext> wires;
    wires.reserve(func.num_wires());
    wires.assign(inputs.begin(), inputs.end());
    for (const Gate& g : func.gates) {
      switch (g.kind) {
        case GateKind::Xor: wires.push_back(eval_xor(wires[g.a], wires[g.b])); break;
        case GateKind::And: wires.push_back(eval_and(wires[g.a], wires[g.b])); break;
        case GateKind::Not: wires.push_back(eval_not(pk, wires[g.a])); break;
        case GateKind::Const0: wires.push_back(trivial_bit(pk, 0)); break;
        case GateKind::Const1: wires.push_back(trivial_bit(pk, 1)); break;
      }
    }
    std::vector<Ciphertext> out;
    out.reserve(func.outputs.size());
    for (std::uint32_t o : func.outputs) out.push_back(wires[o]);
    return out;
  }

  std::vector<Ciphertext> encrypt_bits(const EvalPublicKey& pk, const BitVec& bits,
                                       std::uint64_t seed) const {
    std::vector<Ciphertext> out;
    out.reserve(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
      out.push_back(encrypt_bit(pk, bits[i], derive_seed(seed, i)));
    }
    return out;
  }

  BitVec decrypt_bits(const EvalSecretKey& sk, std::span<const Ciphertext> cts) const {
    BitVec out;
    out.reserve(cts.size());
    for (const Ciphertext& ct : cts) out.push_back(decrypt_bit(sk, ct));
    return out;
  }

 protected:
  static void require_same_key(const Ciphertext& a, const Ciphertext& b) {
    if (!(a.key_fingerprint == b.key_fingerprint) || a.backend_id != b.backend_id) {
      throw KeyMismatch("gate operands under different keys");
    }
  }

  static void require_key(const EvalPublicKey& pk, const Ciphertext& a) {
    if (!(a.key_fingerprint == pk.fingerprint) || a.backend_id != pk.backend) {
      throw KeyMismatch("ciphertext under a different key");
    }
  }
};

// ---- Clear backend ----

class ClearBackend final : public FheBackend {
 public:
  BackendId id() const override { return BackendId::Clear; }

  SchemeParams default_params() const override {
    // Values are inert for the pass-through scheme; the depth bound is
    // effectively unlimited.
    return SchemeParams{64, 8, 1, 1u << 24};
  }

  EvalKeyPair keygen(const SchemeParams& params_in, std::uint64_t seed) const override {
    SchemeParams params = params_in;
    params.validate();
    // Depth 0 means "derive"; the pass-through scheme has no real bound.
    if (params.max_mult_depth == 0) params.max_mult_depth = 1u << 24;
    EvalKeyPair kp;
    kp.public_key.backend = BackendId::Clear;
    kp.public_key.params = params;
    // The seed is folded into the public serialization so distinct clear
    // key pairs get distinct fingerprints; the carrier stays even so every
    // public element still "decrypts" to 0.
    kp.public_key.elements = {BigInt(seed) * 2};
    kp.public_key.fingerprint = Fingerprint::of(serialize_eval_public(kp.public_key));
    kp.secret_key.backend = BackendId::Clear;
    kp.secret_key.params = params;
    kp.secret_key.secret = BigInt(seed) * 2 + 1;
    kp.secret_key.fingerprint = kp.public_key.fingerprint;
    return kp;
  }

  Ciphertext encrypt_bit(const EvalPublicKey& pk, Bit bit, std::uint64_t) const override {
    if (bit > 1) throw InvalidBit("plaintext bit must be 0 or 1");
    return Ciphertext{BigInt(bit), kInfiniteNoiseBudget, pk.fingerprint, BackendId::Clear, nullptr};
  }

  Bit decrypt_bit(const EvalSecretKey& sk, const Ciphertext& ct) const override {
    if (!(ct.key_fingerprint == sk.fingerprint) || ct.backend_id != BackendId::Clear) {
      throw KeyMismatch("decrypt: ciphertext under a different key");
    }
    return static_cast<Bit>(ct.value & 1);
  }

  Ciphertext eval_xor(const Ciphertext& a, const Ciphertext& b) const override {
    require_same_key(a, b);
    return Ciphertext{BigInt((a.value ^ b.value) & 1), kInfiniteNoiseBudget,
                      a.key_fingerprint, BackendId::Clear, nullptr};
  }

  Ciphertext eval_and(const Ciphertext& a, const Ciphertext& b) const override {
    require_same_key(a, b);
    return Ciphertext{BigInt(a.value & b.value & 1), kInfiniteNoiseBudget,
                      a.key_fingerprint, BackendId::Clear, nullptr};
  }

  Ciphertext eval_not(const EvalPublicKey& pk, const Ciphertext& a) const override {
    require_key(pk, a);
    return Ciphertext{BigInt((a.value ^ 1) & 1), kInfiniteNoiseBudget,
                      a.key_fingerprint, BackendId::Clear, nullptr};
  }

  Ciphertext trivial_bit(const EvalPublicKey& pk, Bit bit) const override {
    return Ciphertext{BigInt(bit & 1), kInfiniteNoiseBudget, pk.fingerprint,
                      BackendId::Clear, nullptr};
  }

  std::optional<Circuit> decryption_circuit() const override {
    // decrypt(sk, c) = c for the pass-through scheme: one secret-key input
    // wire (ignored) and one ciphertext bit wire (forwarded).
    CircuitBuilder b(2);
    return b.build({b.input(1)});
  }
};

// ---- Toy integer backend ----

class ToyBackend final : public FheBackend {
 public:
  BackendId id() const override { return BackendId::Toy; }

  SchemeParams default_params() const override {
    SchemeParams p{8192, 16, 32, 0};
    p.max_mult_depth = p.derive_max_mult_depth();
    return p;
  }

  EvalKeyPair keygen(const SchemeParams& params_in, std::uint64_t seed) const override {
    SchemeParams params = params_in;
    params.validate();
    unsigned derived = params.derive_max_mult_depth();
    if (params.max_mult_depth == 0) {
      params.max_mult_depth = derived;
    } else if (params.max_mult_depth > derived) {
      throw InvalidParams("declared max_mult_depth " + std::to_string(params.max_mult_depth) +
                          " exceeds what the noise budget supports (" +
                          std::to_string(derived) + ")");
    }

    Rng rng(seed);
    EvalKeyPair kp;
    kp.secret_key.backend = BackendId::Toy;
    kp.secret_key.params = params;
    kp.secret_key.secret = rng.next_odd(params.secret_bits);

    const BigInt& p = kp.secret_key.secret;
    BigInt q0 = rng.next_bits(64) | (BigInt(1) << 63);
    kp.public_key.backend = BackendId::Toy;
    kp.public_key.params = params;
    kp.public_key.elements.reserve(params.pk_elements + 1);
    kp.public_key.elements.push_back(q0 * p);  // x0, noise-free modulus
    for (unsigned i = 0; i < params.pk_elements; ++i) {
      BigInt qi = rng.next_below(q0);
      BigInt ri = rng.next_bits(params.noise_bits);
      kp.public_key.elements.push_back(qi * p + 2 * ri);
    }
    kp.public_key.fingerprint = Fingerprint::of(serialize_eval_public(kp.public_key));
    kp.secret_key.fingerprint = kp.public_key.fingerprint;

    auto ctx = std::make_shared<EvalContext>();
    ctx->modulus = kp.public_key.elements[0];
    ctx->noise_cap = params.noise_cap();
    kp.public_key.ctx = std::move(ctx);

    self_test(kp, seed);
    return kp;
  }

  Ciphertext encrypt_bit(const EvalPublicKey& pk, Bit bit, std::uint64_t seed) const override {
    if (bit > 1) throw InvalidBit("plaintext bit must be 0 or 1");
    if (pk.elements.size() != pk.params.pk_elements + 1) {
      throw InvalidParams("malformed toy public key");
    }
    Rng rng(seed);
    BigInt c = bit + 2 * rng.next_bits(pk.params.noise_bits);
    for (unsigned i = 1; i < pk.elements.size(); ++i) {
      if (rng.next_bool()) c += pk.elements[i];
    }
    c %= pk.elements[0];
    return Ciphertext{std::move(c), pk.params.noise_cap() - pk.params.fresh_noise_bits(),
                      pk.fingerprint, BackendId::Toy, pk.ctx};
  }

  Bit decrypt_bit(const EvalSecretKey& sk, const Ciphertext& ct) const override {
    if (!(ct.key_fingerprint == sk.fingerprint) || ct.backend_id != BackendId::Toy) {
      throw KeyMismatch("decrypt: ciphertext under a different key");
    }
    // Defined behavior past the budget: the result is whatever the residue
    // says, which is garbage once noise crossed p/2. Callers watch the budget.
    return raw_decrypt(sk.secret, ct.value);
  }

  Ciphertext eval_xor(const Ciphertext& a, const Ciphertext& b) const override {
    require_same_key(a, b);
    BigInt v = a.value + b.value;
    reduce(v, a, b);
    return Ciphertext{std::move(v), std::min(a.noise_budget, b.noise_budget) - 1,
                      a.key_fingerprint, BackendId::Toy, a.ctx ? a.ctx : b.ctx};
  }

  Ciphertext eval_and(const Ciphertext& a, const Ciphertext& b) const override {
    require_same_key(a, b);
    const EvalContext* ctx = a.ctx ? a.ctx.get() : b.ctx.get();
    if (ctx == nullptr) {
      throw InvalidParams("toy AND requires the key evaluation context");
    }
    BigInt v = (a.value * b.value) % ctx->modulus;
    int budget = a.noise_budget + b.noise_budget - ctx->noise_cap;
    return Ciphertext{std::move(v), budget, a.key_fingerprint, BackendId::Toy,
                      a.ctx ? a.ctx : b.ctx};
  }

  Ciphertext eval_not(const EvalPublicKey& pk, const Ciphertext& a) const override {
    require_key(pk, a);
    BigInt v = a.value + 1;
    if (a.ctx) v %= a.ctx->modulus;
    return Ciphertext{std::move(v), a.noise_budget - 1, a.key_fingerprint, BackendId::Toy, a.ctx};
  }

  Ciphertext trivial_bit(const EvalPublicKey& pk, Bit bit) const override {
    return Ciphertext{BigInt(bit & 1), pk.params.noise_cap() - 1, pk.fingerprint,
                      BackendId::Toy, pk.ctx};
  }

  // The (c mod p) mod 2 circuit over thousands of bits is far past any
  // depth this scheme supports, so no bootstrap-style path exists.
  std::optional<Circuit> decryption_circuit() const override { return std::nullopt; }

  static Bit raw_decrypt(const BigInt& secret, const BigInt& value) {
    BigInt r = value % secret;
    return static_cast<Bit>(r & 1);
  }

 private:
  static void reduce(BigInt& v, const Ciphertext& a, const Ciphertext& b) {
    const EvalContext* ctx = a.ctx ? a.ctx.get() : b.ctx.get();
    if (ctx != nullptr) v %= ctx->modulus;
  }

  // Verifies the declared depth empirically: a balanced AND-tree of that
  // depth over fresh encryptions of 1 must still decrypt to 1, and every
  // public element must decrypt to 0.
  void self_test(const EvalKeyPair& kp, std::uint64_t seed) const {
    for (const BigInt& e : kp.public_key.elements) {
      if (raw_decrypt(kp.secret_key.secret, e) != 0) {
        throw InvalidParams("keygen self-test: public element decrypts to 1");
      }
    }
    std::uint64_t st_seed = derive_seed(seed, 0x5e1f7e57u);
    std::vector<Ciphertext> layer;
    layer.reserve(1u << kp.public_key.params.max_mult_depth);
    for (unsigned i = 0; i < (1u << kp.public_key.params.max_mult_depth); ++i) {
      layer.push_back(encrypt_bit(kp.public_key, 1, derive_seed(st_seed, i)));
    }
    while (layer.size() > 1) {
      std::vector<Ciphertext> next;
      next.reserve(layer.size() / 2);
      for (std::size_t i = 0; i + 1 < layer.size(); i += 2) {
        next.push_back(eval_and(layer[i], layer[i + 1]));
      }
      layer = std::move(next);
    }
    if (layer[0].noise_budget < 0 || decrypt_bit(kp.secret_key, layer[0]) != 1) {
      throw InvalidParams("keygen self-test: AND tree at declared depth failed to decrypt");
    }
  }
};

inline const FheBackend& backend_for(BackendId id) {
  static const ClearBackend clear;
  static const ToyBackend toy;
  return id == BackendId::Clear ? static_cast<const FheBackend&>(clear)
                                : static_cast<const FheBackend&>(toy);
}

// ---- Key file parsing (needs backend context for element counts) ----

inline EvalPublicKey parse_eval_public(const std::string& text, BackendId backend) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty key file", 1);
  EvalPublicKey pk;
  pk.backend = backend;
  pk.params = detail::parse_evalkey_header(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      pk.elements.push_back(bigint_from_hex(line));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  std::size_t expect = backend == BackendId::Toy ? pk.params.pk_elements + 1 : 1;
  if (pk.elements.size() != expect) {
    throw ParseError("expected " + std::to_string(expect) + " public elements, got " +
                     std::to_string(pk.elements.size()), lineno);
  }
  if (backend == BackendId::Toy) {
    pk.params.max_mult_depth = pk.params.derive_max_mult_depth();
    auto ctx = std::make_shared<EvalContext>();
    ctx->modulus = pk.elements[0];
    ctx->noise_cap = pk.params.noise_cap();
    pk.ctx = std::move(ctx);
  } else {
    pk.params.max_mult_depth = 1u << 24;
  }
  pk.fingerprint = Fingerprint::of(serialize_eval_public(pk));
  return pk;
}

inline EvalKeyPair parse_eval_secret(const std::string& text, BackendId backend) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty key file", 1);
  SchemeParams params = detail::parse_evalkey_header(line);
  std::vector<BigInt> ints;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      ints.push_back(bigint_from_hex(line));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  std::size_t expect = 1 + (backend == BackendId::Toy ? params.pk_elements + 1 : 1);
  if (ints.size() != expect) {
    throw ParseError("expected " + std::to_string(expect) + " key integers, got " +
                     std::to_string(ints.size()), lineno);
  }

  EvalKeyPair kp;
  kp.public_key.backend = backend;
  kp.public_key.params = params;
  kp.public_key.elements.assign(ints.begin() + 1, ints.end());
  kp.secret_key.backend = backend;
  kp.secret_key.params = params;
  kp.secret_key.secret = ints[0];
  if (backend == BackendId::Toy) {
    kp.public_key.params.max_mult_depth = params.derive_max_mult_depth();
    auto ctx = std::make_shared<EvalContext>();
    ctx->modulus = kp.public_key.elements[0];
    ctx->noise_cap = params.noise_cap();
    kp.public_key.ctx = std::move(ctx);
  } else {
    kp.public_key.params.max_mult_depth = 1u << 24;
  }
  kp.secret_key.params.max_mult_depth = kp.public_key.params.max_mult_depth;
  kp.public_key.fingerprint = Fingerprint::of(serialize_eval_public(kp.public_key));
  kp.secret_key.fingerprint = kp.public_key.fingerprint;
  return kp;
}

}  // namespace oblivion
