#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oblivion/circuit.hpp"
#include "oblivion/fhe.hpp"

using namespace oblivion;

// ---- Oracles ----------------------------------------------------------

namespace {

// Independent decryption for the integer scheme, straight from the
// definition: (c mod p) mod 2, with the residue kept in [0, p).
Bit dghv_decrypt(const BigInt& p, const BigInt& c) {
  BigInt r = c % p;
  if (r < 0) r += p;
  return static_cast<Bit>(static_cast<unsigned>(r & 1));
}

// ceil(log2(n+1)) via shifting; re-derived here rather than calling the
// library's params helpers.
int bit_length(unsigned n) {
  int bits = 0;
  while (n > 0) {
    n >>= 1;
    ++bits;
  }
  return bits;
}

const SchemeParams kSmallToy{512, 8, 4, 0};

const FheBackend& toy() { return backend_for(BackendId::Toy); }
const FheBackend& clear() { return backend_for(BackendId::Clear); }

Circuit random_circuit(std::mt19937_64& rng, unsigned max_inputs, unsigned max_gates) {
  std::uniform_int_distribution<unsigned> in_d(1, max_inputs), g_d(1, max_gates);
  unsigned n_in = in_d(rng);
  CircuitBuilder b(n_in);
  std::vector<CircuitBuilder::Wire> wires;
  for (unsigned i = 0; i < n_in; ++i) wires.push_back(b.input(i));
  unsigned n_gates = g_d(rng);
  std::uniform_int_distribution<int> kind_d(0, 4);
  for (unsigned i = 0; i < n_gates; ++i) {
    std::uniform_int_distribution<std::size_t> w_d(0, wires.size() - 1);
    switch (kind_d(rng)) {
      case 0: wires.push_back(b.xor_(wires[w_d(rng)], wires[w_d(rng)])); break;
      case 1: wires.push_back(b.and_(wires[w_d(rng)], wires[w_d(rng)])); break;
      case 2: wires.push_back(b.not_(wires[w_d(rng)])); break;
      case 3: wires.push_back(b.const0()); break;
      case 4: wires.push_back(b.const1()); break;
    }
  }
  std::uniform_int_distribution<std::size_t> out_d(0, wires.size() - 1);
  return b.build({wires[out_d(rng)], wires[out_d(rng)]});
}

BitVec random_bits(std::mt19937_64& rng, unsigned n) {
  BitVec bits(n);
  for (unsigned i = 0; i < n; ++i) bits[i] = static_cast<Bit>(rng() & 1);
  return bits;
}

}  // namespace

// ---- Parameters --------------------------------------------------------

TEST_CASE("params validation rejects degenerate settings") {
  CHECK_THROWS_AS((SchemeParams{0, 8, 4, 0}.validate()), InvalidParams);
  CHECK_THROWS_AS((SchemeParams{64, 0, 4, 0}.validate()), InvalidParams);
  CHECK_THROWS_AS((SchemeParams{64, 8, 0, 0}.validate()), InvalidParams);
  CHECK_THROWS_AS((SchemeParams{10, 8, 4, 0}.validate()), InvalidParams);  // no headroom
  CHECK_NOTHROW((SchemeParams{64, 8, 4, 0}.validate()));
}

TEST_CASE("noise accounting matches its definition") {
  SchemeParams p{512, 8, 4, 0};
  CHECK(p.noise_cap() == 510);
  CHECK(p.fresh_noise_bits() == 8 + 1 + bit_length(4 + 1));
  // Depth-d AND trees double the noise estimate per level, so the bound is
  // the largest d with fresh * 2^d <= cap; re-derive by direct search.
  unsigned expect = 0;
  while ((std::int64_t{p.fresh_noise_bits()} << (expect + 1)) <= p.noise_cap()) ++expect;
  CHECK(p.derive_max_mult_depth() == expect);
  CHECK((std::int64_t{p.fresh_noise_bits()} << expect) <= p.noise_cap());
}

TEST_CASE("derived depth grows with the secret modulus") {
  unsigned last = 0;
  for (unsigned sb : {128u, 512u, 2048u, 8192u}) {
    SchemeParams p{sb, 16, 32, 0};
    unsigned d = p.derive_max_mult_depth();
    CHECK(d >= last);
    last = d;
  }
  CHECK(toy().default_params().max_mult_depth == 8);
}

// ---- Key generation ----------------------------------------------------

TEST_CASE("toy keygen is deterministic per seed and distinct across seeds") {
  EvalKeyPair a1 = toy().keygen(kSmallToy, 1);
  EvalKeyPair a2 = toy().keygen(kSmallToy, 1);
  EvalKeyPair b = toy().keygen(kSmallToy, 2);
  CHECK(a1.secret_key.secret == a2.secret_key.secret);
  CHECK(a1.public_key.elements == a2.public_key.elements);
  CHECK(a1.fingerprint() == a2.fingerprint());
  CHECK(a1.secret_key.secret != b.secret_key.secret);
  CHECK_FALSE(a1.fingerprint() == b.fingerprint());
}

TEST_CASE("toy public keys are valid encryptions of zero under an odd secret") {
  EvalKeyPair kp = toy().keygen(kSmallToy, 42);
  const BigInt& p = kp.secret_key.secret;
  CHECK(static_cast<int>(p & 1) == 1);  // p is odd
  // x0 is a clean multiple of p so reduction mod x0 preserves residues.
  CHECK(kp.public_key.elements.at(0) % p == 0);
  for (std::size_t i = 1; i < kp.public_key.elements.size(); ++i) {
    CAPTURE(i);
    CHECK(dghv_decrypt(p, kp.public_key.elements[i]) == 0);
  }
  CHECK(kp.public_key.elements.size() == kSmallToy.pk_elements + 1);
}

TEST_CASE("keygen rejects a declared depth beyond what the noise supports") {
  SchemeParams p = kSmallToy;
  p.max_mult_depth = p.derive_max_mult_depth() + 1;
  CHECK_THROWS_AS(toy().keygen(p, 1), InvalidParams);
  p.max_mult_depth = p.derive_max_mult_depth();
  CHECK_NOTHROW(toy().keygen(p, 1));
}

// ---- Encryption and decryption ------------------------------------------

TEST_CASE("toy encrypt/decrypt round-trips both bits against the oracle") {
  EvalKeyPair kp = toy().keygen(kSmallToy, 7);
  for (Bit m = 0; m <= 1; ++m) {
    for (std::uint64_t seed = 0; seed < 32; ++seed) {
      Ciphertext ct = toy().encrypt_bit(kp.public_key, m, seed);
      CAPTURE(m, seed);
      CHECK(toy().decrypt_bit(kp.secret_key, ct) == m);
      CHECK(dghv_decrypt(kp.secret_key.secret, ct.value) == m);
    }
  }
  CHECK_THROWS_AS(toy().encrypt_bit(kp.public_key, 2, 0), InvalidBit);
}

TEST_CASE("encryption is probabilistic: fresh ciphertexts rarely collide") {
  // Default parameters give enough randomness (16 noise bits, 32 subset
  // choices) that 100 draws collide with negligible probability; the tiny
  // test parameters would see birthday collisions.
  EvalKeyPair kp = toy().keygen(toy().default_params(), 7);
  std::set<BigInt> seen;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    seen.insert(toy().encrypt_bit(kp.public_key, 1, seed).value);
  }
  CHECK(seen.size() >= 99);
}

TEST_CASE("decrypting under the wrong key is refused by the fingerprint guard") {
  EvalKeyPair kp = toy().keygen(kSmallToy, 7);
  EvalKeyPair other = toy().keygen(kSmallToy, 8);
  Ciphertext ct = toy().encrypt_bit(kp.public_key, 1, 0);
  CHECK_THROWS_AS(toy().decrypt_bit(other.secret_key, ct), KeyMismatch);
}

TEST_CASE("encrypt_bits derives distinct per-bit randomness") {
  EvalKeyPair kp = toy().keygen(kSmallToy, 7);
  BitVec m{1, 1, 1, 1, 1, 1, 1, 1};
  std::vector<Ciphertext> cts = toy().encrypt_bits(kp.public_key, m, 99);
  std::set<BigInt> distinct;
  for (const Ciphertext& ct : cts) distinct.insert(ct.value);
  CHECK(distinct.size() == m.size());
  CHECK(toy().decrypt_bits(kp.secret_key, cts) == m);
}

// ---- Gate evaluation ----------------------------------------------------

TEST_CASE("homomorphic gates match boolean truth tables") {
  EvalKeyPair kp = toy().keygen(kSmallToy, 3);
  std::uint64_t seed = 0;
  for (Bit a = 0; a <= 1; ++a) {
    for (Bit b = 0; b <= 1; ++b) {
      Ciphertext ca = toy().encrypt_bit(kp.public_key, a, ++seed);
      Ciphertext cb = toy().encrypt_bit(kp.public_key, b, ++seed);
      CAPTURE(a, b);
      CHECK(toy().decrypt_bit(kp.secret_key, toy().eval_xor(ca, cb)) == (a ^ b));
      CHECK(toy().decrypt_bit(kp.secret_key, toy().eval_and(ca, cb)) == (a & b));
    }
    Ciphertext ca = toy().encrypt_bit(kp.public_key, a, ++seed);
    CHECK(toy().decrypt_bit(kp.secret_key, toy().eval_not(kp.public_key, ca)) == (a ^ 1));
  }
}

TEST_CASE("noise budgets follow the documented arithmetic") {
  EvalKeyPair kp = toy().keygen(kSmallToy, 3);
  const int cap = kSmallToy.noise_cap();
  const int fresh = cap - kSmallToy.fresh_noise_bits();
  Ciphertext a = toy().encrypt_bit(kp.public_key, 1, 1);
  Ciphertext b = toy().encrypt_bit(kp.public_key, 0, 2);
  CHECK(a.noise_budget == fresh);
  CHECK(toy().eval_xor(a, b).noise_budget == fresh - 1);
  CHECK(toy().eval_and(a, b).noise_budget == fresh + fresh - cap);
  CHECK(toy().eval_not(kp.public_key, a).noise_budget == fresh - 1);
  CHECK(toy().trivial_bit(kp.public_key, 1).noise_budget == cap - 1);
}

TEST_CASE("trivial ciphertexts decrypt and combine with real ones") {
  EvalKeyPair kp = toy().keygen(kSmallToy, 3);
  Ciphertext one = toy().trivial_bit(kp.public_key, 1);
  Ciphertext zero = toy().trivial_bit(kp.public_key, 0);
  CHECK(toy().decrypt_bit(kp.secret_key, one) == 1);
  CHECK(toy().decrypt_bit(kp.secret_key, zero) == 0);
  Ciphertext enc = toy().encrypt_bit(kp.public_key, 1, 5);
  CHECK(toy().decrypt_bit(kp.secret_key, toy().eval_and(enc, one)) == 1);
  CHECK(toy().decrypt_bit(kp.secret_key, toy().eval_xor(enc, one)) == 0);
}

TEST_CASE("gates refuse operands under different keys") {
  EvalKeyPair kp = toy().keygen(kSmallToy, 3);
  EvalKeyPair other = toy().keygen(kSmallToy, 4);
  Ciphertext a = toy().encrypt_bit(kp.public_key, 1, 1);
  Ciphertext b = toy().encrypt_bit(other.public_key, 1, 1);
  CHECK_THROWS_AS(toy().eval_xor(a, b), KeyMismatch);
  CHECK_THROWS_AS(toy().eval_and(a, b), KeyMismatch);
  CHECK_THROWS_AS(toy().eval_not(kp.public_key, b), KeyMismatch);
}

// ---- Depth limits and noise overflow ------------------------------------

TEST_CASE("an AND tree at the derived depth still decrypts; one deeper is refused") {
  EvalKeyPair kp = toy().keygen(kSmallToy, 11);
  const unsigned d = kp.public_key.params.max_mult_depth;

  // Balanced tree over 2^d fresh encryptions of 1 via the evaluator.
  CircuitBuilder b(1u << d);
  std::vector<CircuitBuilder::Wire> ws;
  for (unsigned i = 0; i < (1u << d); ++i) ws.push_back(b.input(i));
  Circuit at_limit = b.build({b.and_tree(ws)});
  REQUIRE(mult_depth(at_limit) == d);

  std::vector<Ciphertext> ones =
      toy().encrypt_bits(kp.public_key, BitVec(1u << d, 1), 1234);
  std::vector<Ciphertext> out = toy().evaluate(kp.public_key, at_limit, ones);
  REQUIRE(out.size() == 1);
  CHECK(out[0].noise_budget >= 0);
  CHECK(toy().decrypt_bit(kp.secret_key, out[0]) == 1);

  CircuitBuilder b2(1u << (d + 1));
  std::vector<CircuitBuilder::Wire> ws2;
  for (unsigned i = 0; i < (1u << (d + 1)); ++i) ws2.push_back(b2.input(i));
  Circuit too_deep = b2.build({b2.and_tree(ws2)});
  std::vector<Ciphertext> more =
      toy().encrypt_bits(kp.public_key, BitVec(1u << (d + 1), 1), 99);
  CHECK_THROWS_AS(toy().evaluate(kp.public_key, too_deep, more), DepthExceeded);
}

TEST_CASE("driving noise past the cap corrupts decryption") {
  // Chain raw eval_and calls beyond the budget (the evaluator would refuse
  // this statically) and watch plaintext fidelity break down.
  SchemeParams tiny{64, 8, 4, 0};
  int corrupted = 0;
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    EvalKeyPair kp = toy().keygen(tiny, 100 + trial);
    Ciphertext acc = toy().encrypt_bit(kp.public_key, 1, 1);
    for (int i = 0; i < 8; ++i) {
      acc = toy().eval_and(acc, toy().encrypt_bit(kp.public_key, 1, 10 + i));
    }
    CHECK(acc.noise_budget < 0);
    if (toy().decrypt_bit(kp.secret_key, acc) != 1) ++corrupted;
  }
  CHECK(corrupted >= 1);
}

// ---- The evaluator across backends ---------------------------------------

TEST_CASE("evaluate agrees with plaintext evaluation on both backends") {
  EvalKeyPair toy_kp = toy().keygen(kSmallToy, 21);
  EvalKeyPair clear_kp = clear().keygen(clear().default_params(), 21);
  const unsigned max_depth = toy_kp.public_key.params.max_mult_depth;

  std::mt19937_64 rng(0xfeed);
  int tested = 0;
  while (tested < 60) {
    Circuit c = random_circuit(rng, 6, 30);
    if (mult_depth(c) > max_depth) continue;
    ++tested;
    BitVec in = random_bits(rng, c.num_inputs);
    BitVec expect = eval_plain(c, in);

    std::vector<Ciphertext> toy_in = toy().encrypt_bits(toy_kp.public_key, in, rng());
    std::vector<Ciphertext> clear_in = clear().encrypt_bits(clear_kp.public_key, in, rng());
    CAPTURE(tested, c.num_inputs, c.gates.size());
    CHECK(toy().decrypt_bits(toy_kp.secret_key,
                             toy().evaluate(toy_kp.public_key, c, toy_in)) == expect);
    CHECK(clear().decrypt_bits(clear_kp.secret_key,
                               clear().evaluate(clear_kp.public_key, c, clear_in)) == expect);
  }
}

TEST_CASE("evaluate rejects wrong arity and foreign ciphertexts") {
  EvalKeyPair kp = toy().keygen(kSmallToy, 5);
  Circuit c = build_equality(2);
  std::vector<Ciphertext> three = toy().encrypt_bits(kp.public_key, {1, 0, 1}, 1);
  CHECK_THROWS_AS(toy().evaluate(kp.public_key, c, three), ArityMismatch);

  EvalKeyPair other = toy().keygen(kSmallToy, 6);
  std::vector<Ciphertext> mixed = toy().encrypt_bits(kp.public_key, {1, 0, 1}, 1);
  mixed.push_back(toy().encrypt_bit(other.public_key, 1, 2));
  CHECK_THROWS_AS(toy().evaluate(kp.public_key, c, mixed), KeyMismatch);
}

// ---- Clear backend -------------------------------------------------------

TEST_CASE("clear backend is a faithful pass-through with unlimited budget") {
  EvalKeyPair kp = clear().keygen(clear().default_params(), 1);
  Ciphertext ct = clear().encrypt_bit(kp.public_key, 1, 77);
  CHECK(ct.value == 1);
  CHECK(ct.noise_budget == kInfiniteNoiseBudget);
  CHECK(clear().decrypt_bit(kp.secret_key, ct) == 1);

  EvalKeyPair other = clear().keygen(clear().default_params(), 2);
  CHECK_FALSE(kp.fingerprint() == other.fingerprint());
  CHECK_THROWS_AS(clear().decrypt_bit(other.secret_key, ct), KeyMismatch);
}

TEST_CASE("decryption circuits: clear forwards the ciphertext bit, toy has none") {
  std::optional<Circuit> dec = clear().decryption_circuit();
  REQUIRE(dec.has_value());
  CHECK(dec->num_inputs == 2);
  REQUIRE(dec->outputs.size() == 1);
  for (Bit sk = 0; sk <= 1; ++sk) {
    for (Bit ct = 0; ct <= 1; ++ct) {
      CHECK(eval_plain(*dec, {sk, ct}) == BitVec{ct});
    }
  }
  CHECK_FALSE(toy().decryption_circuit().has_value());
}

// ---- Serialization --------------------------------------------------------

TEST_CASE("eval key files carry a pinned header and survive round-trips") {
  EvalKeyPair kp = toy().keygen(SchemeParams{8192, 16, 32, 0}, 500);
  std::string pub = serialize_eval_public(kp.public_key);
  CHECK(pub.rfind("OBLIVION-EVALKEY v1; params=8192,16,32\n", 0) == 0);

  EvalPublicKey back = parse_eval_public(pub, BackendId::Toy);
  CHECK(back.fingerprint == kp.public_key.fingerprint);
  CHECK(back.params == kp.public_key.params);
  CHECK(back.elements == kp.public_key.elements);

  EvalKeyPair kp2 = parse_eval_secret(serialize_eval_secret(kp), BackendId::Toy);
  CHECK(kp2.secret_key.secret == kp.secret_key.secret);
  CHECK(kp2.fingerprint() == kp.fingerprint());
  // The reconstructed pair must actually decrypt.
  Ciphertext ct = toy().encrypt_bit(kp.public_key, 1, 9);
  CHECK(toy().decrypt_bit(kp2.secret_key, ct) == 1);

  CHECK_THROWS_AS(parse_eval_public("EVALKEY v0\n123\n", BackendId::Toy), ParseError);
  CHECK_THROWS_AS(parse_eval_public("OBLIVION-EVALKEY v1; params=8192,16\n", BackendId::Toy),
                  ParseError);
}

TEST_CASE("ciphertext lines round-trip and keep the pinned layout") {
  EvalKeyPair kp = toy().keygen(kSmallToy, 500);
  std::vector<Ciphertext> cts = toy().encrypt_bits(kp.public_key, {1, 0, 1, 1}, 4);
  std::string text = serialize_ciphertexts(cts);

  std::istringstream lines(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    CAPTURE(line);
    // `<hex value> <decimal noise budget> <fingerprint hex>`
    std::istringstream ls(line);
    std::string value_hex, budget, fp_hex;
    REQUIRE((ls >> value_hex >> budget >> fp_hex));
    CHECK(value_hex.find_first_not_of("0123456789abcdef") == std::string::npos);
    CHECK(fp_hex == kp.fingerprint().hex());
    CHECK(std::stoi(budget) == cts[n].noise_budget);
    ++n;
  }
  CHECK(n == 4);

  std::vector<Ciphertext> back = parse_ciphertexts(text, BackendId::Toy, &kp.public_key);
  REQUIRE(back.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(back[i] == cts[i]);
  CHECK(toy().decrypt_bits(kp.secret_key, back) == BitVec{1, 0, 1, 1});

  CHECK_THROWS_AS(parse_ciphertexts("zz 1\n", BackendId::Toy, &kp.public_key), ParseError);
}

TEST_CASE("hex big-integer helpers invert each other") {
  std::mt19937_64 rng(515);
  for (int t = 0; t < 50; ++t) {
    BigInt v = BigInt(rng()) * rng() + rng();
    CHECK(bigint_from_hex(bigint_to_hex(v)) == v);
  }
  CHECK(bigint_to_hex(BigInt(0)) == "0");
  CHECK_THROWS_AS(bigint_from_hex("12g4"), ParseError);
  CHECK_THROWS_AS(bigint_from_hex(""), ParseError);
}
