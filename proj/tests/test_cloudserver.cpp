// Tests for the server-side storage substrate: handle-addressed ciphertext
// blobs, the function registry, the administrator-gated policy slot, and
// directory persistence.

#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "oblivion/cloudserver.hpp"

using namespace oblivion;

namespace {

const FheBackend& toy() { return backend_for(BackendId::Toy); }

constexpr SchemeParams kSmallToy{512, 8, 4, 0};

std::filesystem::path fresh_dir(const std::string& name) {
  std::filesystem::path dir = std::filesystem::temp_directory_path() / ("oblivion-test-" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

EncryptedPRB sample_prb(const EvalPublicKey& pk, Bit marker, std::uint64_t seed) {
  PolicyRuleBase prb;
  prb.schema = {SchemaEntry{"subject_fp", 2, AttrCategory::Subject}};
  prb.func_id_width = 1;
  prb.func_slots = 1;
  prb.rules.push_back(PolicyRule{{Predicate{"subject_fp", {marker, 1}}}, {}});
  return encrypt_prb(pk, prb, seed);
}

}  // namespace

// ---- Resource store -----------------------------------------------------

TEST_CASE("resource handles are dense from 1 and stable across replacement") {
  EvalKeyPair kp = toy().keygen(kSmallToy, 1);
  ResourceStore store;
  CHECK(store.size() == 0);

  std::vector<Ciphertext> first = toy().encrypt_bits(kp.public_key, {1, 0}, 10);
  std::vector<Ciphertext> second = toy().encrypt_bits(kp.public_key, {0, 1, 1}, 11);
  CHECK(store.store("alice", first) == 1);
  CHECK(store.store("bob", second) == 2);
  CHECK(store.store("alice", {}) == 3);
  CHECK(store.size() == 3);
  CHECK((store.handles() == std::vector<std::uint64_t>{1, 2, 3}));

  const StoredResource& res = store.fetch(2);
  CHECK(res.owner == "bob");
  CHECK(res.key_fingerprint == kp.public_key.fingerprint);
  CHECK(toy().decrypt_bits(kp.secret_key, res.blob) == BitVec{0, 1, 1});

  CHECK_THROWS_AS(store.fetch(4), UnknownHandle);
  CHECK_THROWS_AS(store.fetch(0), UnknownHandle);

  // Replacement swaps bytes and key fingerprint but not owner or handle.
  EvalKeyPair fresh = toy().keygen(kSmallToy, 2);
  store.replace_blob(2, toy().encrypt_bits(fresh.public_key, {1, 1, 1}, 12));
  const StoredResource& swapped = store.fetch(2);
  CHECK(swapped.owner == "bob");
  CHECK(swapped.key_fingerprint == fresh.public_key.fingerprint);
  CHECK(toy().decrypt_bits(fresh.secret_key, swapped.blob) == BitVec{1, 1, 1});
  CHECK_THROWS_AS(store.replace_blob(9, {}), UnknownHandle);
  // No new handle was minted by the replacement.
  CHECK(store.store("carol", {}) == 4);
}

// ---- Function registry -----------------------------------------------------

TEST_CASE("function registry enforces unique ids and valid circuits") {
  FunctionRegistry reg;
  BitVec adder_id{1, 0};
  BitVec eq_id{0, 1};
  CHECK_FALSE(reg.contains(adder_id));
  CHECK_THROWS_AS(reg.lookup_func(adder_id), UnknownFunc);

  reg.register_func(adder_id, build_adder(2));
  reg.register_func(eq_id, build_equality(4));
  CHECK(reg.size() == 2);
  CHECK(reg.contains(adder_id));
  CHECK(reg.lookup_func(adder_id) == build_adder(2));
  CHECK(reg.lookup_func(eq_id) == build_equality(4));

  CHECK_THROWS_AS(reg.register_func(adder_id, build_equality(2)), DuplicateFuncId);
  // The original registration survives the rejected duplicate.
  CHECK(reg.lookup_func(adder_id) == build_adder(2));

  Circuit broken = build_adder(2);
  broken.gates[0].a = 999;  // dangling wire
  CHECK_THROWS_AS(reg.register_func(BitVec{1, 1}, broken), TopologyError);
  CHECK_FALSE(reg.contains(BitVec{1, 1}));
}

// ---- PRB slot ------------------------------------------------------------------

TEST_CASE("policy uploads need a valid signature from the administrator") {
  AuthKeyPair alice = auth_keygen(11, "alice");
  AuthKeyPair mallory = auth_keygen(66, "mallory");
  EvalKeyPair kp = toy().keygen(kSmallToy, 3);
  PrbStore store("alice");
  CHECK(store.administrator() == "alice");
  CHECK_FALSE(store.has_prb());
  CHECK_THROWS_AS(store.current(), Error);

  EncryptedPRB prb = sample_prb(kp.public_key, 1, 30);
  Bytes payload = serialize_encrypted_prb(prb);
  Bytes good_sig = sign(alice.secret_key, payload);

  // Authentication is checked before authorization: a garbage signature
  // from the wrong principal reports the signature problem.
  CHECK_THROWS_AS(
      store.update("mallory", mallory.public_key, payload, Bytes(64, 'x'), prb),
      SignatureRejected);
  // A correctly signed upload from a non-administrator is an authorization
  // failure.
  Bytes mallory_sig = sign(mallory.secret_key, payload);
  CHECK_THROWS_AS(store.update("mallory", mallory.public_key, payload, mallory_sig, prb),
                  NotAdministrator);
  // The administrator's signature must cover the exact payload bytes.
  CHECK_THROWS_AS(store.update("alice", alice.public_key, payload + "x", good_sig, prb),
                  SignatureRejected);
  CHECK_FALSE(store.has_prb());

  store.update("alice", alice.public_key, payload, good_sig, prb);
  CHECK(store.has_prb());
  CHECK(serialize_encrypted_prb(store.current()) == payload);
}

TEST_CASE("the audit trail records successful updates only, oldest first") {
  AuthKeyPair alice = auth_keygen(11, "alice");
  EvalKeyPair kp = toy().keygen(kSmallToy, 4);
  PrbStore store("alice");

  EncryptedPRB v1 = sample_prb(kp.public_key, 0, 40);
  EncryptedPRB v2 = sample_prb(kp.public_key, 1, 41);
  auto push = [&](const EncryptedPRB& prb) {
    Bytes payload = serialize_encrypted_prb(prb);
    store.update("alice", alice.public_key, payload, sign(alice.secret_key, payload), prb);
  };
  push(v1);
  // A failed update must leave no trace.
  CHECK_THROWS_AS(
      store.update("alice", alice.public_key, serialize_encrypted_prb(v2), Bytes(), v2),
      SignatureRejected);
  push(v2);

  REQUIRE(store.audit().size() == 2);
  CHECK(serialize_encrypted_prb(store.audit()[0]) == serialize_encrypted_prb(v1));
  CHECK(serialize_encrypted_prb(store.audit()[1]) == serialize_encrypted_prb(v2));
  CHECK(serialize_encrypted_prb(store.audit().back()) ==
        serialize_encrypted_prb(store.current()));
}

// ---- Persistence ------------------------------------------------------------------

TEST_CASE("a resource store survives a save/load round trip") {
  EvalKeyPair kp = toy().keygen(kSmallToy, 5);
  ResourceStore store;
  store.store("alice", toy().encrypt_bits(kp.public_key, {1, 0, 1}, 50));
  store.store("bob", toy().encrypt_bits(kp.public_key, {0, 0, 1, 1}, 51));

  std::filesystem::path dir = fresh_dir("store-roundtrip");
  save_store(store, dir);
  CHECK(std::filesystem::exists(dir / "index.txt"));
  CHECK(std::filesystem::exists(dir / "r1.ct"));
  CHECK(std::filesystem::exists(dir / "r2.ct"));

  // Index lines: <handle> <owner> <fingerprint hex> <byte length>.
  std::string index = read_file(dir / "index.txt");
  std::istringstream lines(index);
  std::string line;
  REQUIRE(std::getline(lines, line));
  std::istringstream ls(line);
  std::uint64_t handle = 0;
  std::string owner, fp_hex;
  std::size_t length = 0;
  REQUIRE((ls >> handle >> owner >> fp_hex >> length));
  CHECK(handle == 1);
  CHECK(owner == "alice");
  CHECK(fp_hex == kp.public_key.fingerprint.hex());
  CHECK(length == read_file(dir / "r1.ct").size());

  ResourceStore back = load_store(dir, BackendId::Toy, &kp.public_key);
  REQUIRE(back.size() == 2);
  CHECK(back.fetch(1).owner == "alice");
  CHECK(back.fetch(2).owner == "bob");
  CHECK(toy().decrypt_bits(kp.secret_key, back.fetch(1).blob) == BitVec{1, 0, 1});
  CHECK(toy().decrypt_bits(kp.secret_key, back.fetch(2).blob) == BitVec{0, 0, 1, 1});
  CHECK(back.fetch(1).key_fingerprint == kp.public_key.fingerprint);

  // Saving the loaded store reproduces the files byte-for-byte.
  std::filesystem::path dir2 = fresh_dir("store-roundtrip-2");
  save_store(back, dir2);
  CHECK(read_file(dir2 / "index.txt") == index);
  CHECK(read_file(dir2 / "r1.ct") == read_file(dir / "r1.ct"));
  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(dir2);
}

TEST_CASE("loading rejects inconsistent store directories") {
  EvalKeyPair kp = toy().keygen(kSmallToy, 6);
  ResourceStore store;
  store.store("alice", toy().encrypt_bits(kp.public_key, {1}, 60));
  std::filesystem::path dir = fresh_dir("store-errors");
  save_store(store, dir);

  SECTION("missing directory") {
    CHECK_THROWS_AS(load_store(fresh_dir("store-nowhere"), BackendId::Toy), Error);
  }
  SECTION("byte length mismatch") {
    write_file(dir / "r1.ct", read_file(dir / "r1.ct") + "\n");
    CHECK_THROWS_AS(load_store(dir, BackendId::Toy), ParseError);
  }
  SECTION("garbled index line") {
    write_file(dir / "index.txt", "one alice ff 3\n");
    CHECK_THROWS_AS(load_store(dir, BackendId::Toy), ParseError);
  }
  SECTION("handles not dense from 1") {
    std::string body = read_file(dir / "r1.ct");
    write_file(dir / "r7.ct", body);
    write_file(dir / "index.txt",
               "7 alice " + kp.public_key.fingerprint.hex() + " " +
                   std::to_string(body.size()) + "\n");
    CHECK_THROWS_AS(load_store(dir, BackendId::Toy), ParseError);
  }
  std::filesystem::remove_all(dir);
}
