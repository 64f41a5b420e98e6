#pragma once

// Sally's storage and execution substrate: ciphertext blobs addressed by
// opaque server-assigned handles, a registry of evaluable circuits keyed by
// fixed-width func ids, and the encrypted policy rule base with
// administrator-only writes. Everything here stores ciphertexts and public
// metadata only; protocol logic lives in protocol.hpp.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oblivion/abac.hpp"
#include "oblivion/authsig.hpp"
#include "oblivion/circuit.hpp"
#include "oblivion/errors.hpp"
#include "oblivion/fhe.hpp"
#include "oblivion/io.hpp"

namespace oblivion {

struct StoredResource {
  std::vector<Ciphertext> blob;
  std::string owner;
  Fingerprint key_fingerprint;
};

class ResourceStore {
 public:
  std::uint64_t store(std::string owner, std::vector<Ciphertext> blob) {
    Fingerprint fp;
    if (!blob.empty()) fp = blob[0].key_fingerprint;
    std::uint64_t handle = next_handle_++;
    items_.emplace(handle, StoredResource{std::move(blob), std::move(owner), fp});
    return handle;
  }

  const StoredResource& fetch(std::uint64_t handle) const {
    auto it = items_.find(handle);
    if (it == items_.end()) {
      throw UnknownHandle("no resource with handle " + std::to_string(handle));
    }
    return it->second;
  }

  // Swaps a blob in place (re-encryption); owner and handle are stable.
  void replace_blob(std::uint64_t handle, std::vector<Ciphertext> blob) {
    auto it = items_.find(handle);
    if (it == items_.end()) {
      throw UnknownHandle("no resource with handle " + std::to_string(handle));
    }
    if (!blob.empty()) it->second.key_fingerprint = blob[0].key_fingerprint;
    it->second.blob = std::move(blob);
  }

  std::vector<std::uint64_t> handles() const {
    std::vector<std::uint64_t> out;
    out.reserve(items_.size());
    for (const auto& [h, _] : items_) out.push_back(h);
    return out;
  }

  std::size_t size() const { return items_.size(); }

 private:
  std::map<std::uint64_t, StoredResource> items_;
  std::uint64_t next_handle_ = 1;
};

class FunctionRegistry {
 public:
  void register_func(const BitVec& id, Circuit circuit) {
    validate_topology(circuit);
    auto [it, inserted] = funcs_.emplace(id, std::move(circuit));
    if (!inserted) throw DuplicateFuncId("func id " + bits_to_hex(id) + " already registered");
  }

  const Circuit& lookup_func(const BitVec& id) const {
    auto it = funcs_.find(id);
    if (it == funcs_.end()) throw UnknownFunc("no func registered under id " + bits_to_hex(id));
    return it->second;
  }

  bool contains(const BitVec& id) const { return funcs_.count(id) != 0; }
  std::size_t size() const { return funcs_.size(); }

 private:
  std::map<BitVec, Circuit> funcs_;
};

// Encrypted PRB slot with administrator-only replacement. The server
// authenticates the requester's signature over the exact upload bytes,
// then authorizes against the configured administrator id; a valid
// signature from the wrong principal is still rejected.
class PrbStore {
 public:
  PrbStore() = default;
  explicit PrbStore(std::string administrator) : administrator_(std::move(administrator)) {}

  const std::string& administrator() const { return administrator_; }

  void update(const std::string& requester, const AuthPublicKey& requester_pk,
              const Bytes& payload, const Bytes& signature, EncryptedPRB prb) {
    if (!verify(requester_pk, payload, signature)) {
      throw SignatureRejected("PRB update signature did not verify");
    }
    if (requester != administrator_) {
      throw NotAdministrator("PRB updates are accepted only from '" + administrator_ +
                             "', not '" + requester + "'");
    }
    audit_.push_back(prb);
    current_ = std::move(prb);
  }

  bool has_prb() const { return current_.has_value(); }

  const EncryptedPRB& current() const {
    if (!current_) throw Error("no PRB has been uploaded");
    return *current_;
  }

  // One entry per successful update, oldest first; the last entry is the
  // current PRB.
  const std::vector<EncryptedPRB>& audit() const { return audit_; }

 private:
  std::string administrator_;
  std::optional<EncryptedPRB> current_;
  std::vector<EncryptedPRB> audit_;
};

// ---- Directory persistence ----
//
// One file per handle (`r<handle>.ct`, the fhe ciphertext serialization)
// plus `index.txt` with one line per resource:
//
//   <handle> <owner> <key fingerprint hex> <byte length>

inline void save_store(const ResourceStore& store, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::string index;
  for (std::uint64_t h : store.handles()) {
    const StoredResource& res = store.fetch(h);
    std::string body = serialize_ciphertexts(res.blob);
    write_file(dir / ("r" + std::to_string(h) + ".ct"), body);
    index += std::to_string(h) + " " + res.owner + " " + res.key_fingerprint.hex() + " " +
             std::to_string(body.size()) + "\n";
  }
  write_file(dir / "index.txt", index);
}

inline ResourceStore load_store(const std::filesystem::path& dir, BackendId backend,
                                const EvalPublicKey* key_ctx = nullptr) {
  std::string index = read_file(dir / "index.txt");
  ResourceStore store;
  std::istringstream in(index);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::uint64_t handle = 0;
    std::string owner, fp_hex;
    std::size_t length = 0;
    if (!(ls >> handle >> owner >> fp_hex >> length)) {
      throw ParseError("bad index line", lineno);
    }
    std::string body = read_file(dir / ("r" + std::to_string(handle) + ".ct"));
    if (body.size() != length) {
      throw ParseError("resource r" + std::to_string(handle) + ".ct has " +
                       std::to_string(body.size()) + " bytes, index says " +
                       std::to_string(length), lineno);
    }
    std::vector<Ciphertext> blob = parse_ciphertexts(body, backend, key_ctx);
    std::uint64_t got = store.store(owner, std::move(blob));
    if (got != handle) {
      throw ParseError("index handles are not dense from 1", lineno);
    }
  }
  return store;
}

}  // namespace oblivion
