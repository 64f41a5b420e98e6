#pragma once

// Protocol state machines for the three flows:
//
//   basic — one user, her own eval pair; upload encrypted data, request an
//     evaluation, decrypt the result. Unsigned by default, signable by flag.
//   mssp  — multiple users share one eval pair but authenticate with
//     per-principal auth pairs; the server verifies every request signature
//     before evaluating and signs every response.
//   mcsp  — mssp plus server-oblivious access control: requests carry
//     encrypted attributes, the server homomorphically evaluates the
//     compiled canAccess circuit and gates the output with the encrypted
//     decision. A denial decrypts to the all-zero sentinel behind a leading
//     validity bit.
//
// This module owns protocol correctness, not transport: messages travel
// through a Channel (the simulator's bus implements it) and every
// protocol-relevant action is reported to a ProtocolTrace.
//
// Key soundness choices surface here rather than in callers. The subject
// attribute is derived and encrypted server-side from the *authenticated*
// requester's auth key, so a requester cannot claim another subject's
// fingerprint. The requested func id is likewise encrypted server-side
// (the server needs it in clear to look up the circuit anyway). Resource
// and environment attributes come from the client, encrypted; the server
// cannot check them — a trust gap inherited from the access-control model.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oblivion/abac.hpp"
#include "oblivion/authsig.hpp"
#include "oblivion/circuit.hpp"
#include "oblivion/cloudserver.hpp"
#include "oblivion/errors.hpp"
#include "oblivion/fhe.hpp"

namespace oblivion {

inline constexpr std::uint8_t kWireVersion = 0x01;

enum class MsgType : std::uint8_t {
  UploadData = 1,
  OpRequest = 2,
  OpResponse = 3,
  PrbUpload = 4,
  PrbUpdate = 5,
  RekeyAnnounce = 6,
  ReencryptRequest = 7,
};

inline const char* msg_type_name(MsgType t) {
  switch (t) {
    case MsgType::UploadData: return "UploadData";
    case MsgType::OpRequest: return "OpRequest";
    case MsgType::OpResponse: return "OpResponse";
    case MsgType::PrbUpload: return "PrbUpload";
    case MsgType::PrbUpdate: return "PrbUpdate";
    case MsgType::RekeyAnnounce: return "RekeyAnnounce";
    default: return "ReencryptRequest";
  }
}

enum class ProtocolKind : std::uint8_t { Basic = 0, Mssp = 1, Mcsp = 2 };

inline const char* protocol_name(ProtocolKind k) {
  switch (k) {
    case ProtocolKind::Basic: return "basic";
    case ProtocolKind::Mssp: return "mssp";
    default: return "mcsp";
  }
}

inline ProtocolKind protocol_from_name(const std::string& name) {
  if (name == "basic") return ProtocolKind::Basic;
  if (name == "mssp") return ProtocolKind::Mssp;
  if (name == "mcsp") return ProtocolKind::Mcsp;
  throw InvalidParams("unknown protocol '" + name + "'");
}

// A message is content fields in canonical order plus an optional
// signature over exactly those fields. On the wire:
//
//   version byte || envelope(type, content fields ++ [signer, signature])
//
// An unsigned message carries empty signer and signature fields. The
// signed payload is the envelope over the content fields alone, so any
// tampering with content or framing invalidates the signature.
struct Message {
  MsgType type = MsgType::UploadData;
  std::vector<Bytes> fields;
  std::string signer;
  Bytes signature;

  bool signed_() const { return !signature.empty(); }
};

inline Bytes message_payload(const Message& m) {
  return encode_envelope(static_cast<std::uint8_t>(m.type), m.fields);
}

inline Bytes encode_message(const Message& m) {
  std::vector<Bytes> all = m.fields;
  all.push_back(m.signer);
  all.push_back(m.signature);
  return Bytes(1, static_cast<char>(kWireVersion)) +
         encode_envelope(static_cast<std::uint8_t>(m.type), all);
}

inline Message decode_message(const Bytes& wire) {
  if (wire.empty() || static_cast<std::uint8_t>(wire[0]) != kWireVersion) {
    throw ParseError("unknown wire version", 0);
  }
  auto [tag, fields] = decode_envelope(wire.substr(1));
  if (tag < 1 || tag > 7) throw ParseError("unknown message type", 0);
  if (fields.size() < 2) throw ParseError("message missing signature fields", 0);
  Message m;
  m.type = static_cast<MsgType>(tag);
  m.signature = std::move(fields.back());
  fields.pop_back();
  m.signer = std::move(fields.back());
  fields.pop_back();
  m.fields = std::move(fields);
  return m;
}

inline void sign_envelope(Message& m, const AuthKeyPair& kp) {
  m.signer = kp.principal_id;
  m.signature = sign(kp.secret_key, message_payload(m));
}

// ---- Encrypted attribute wire encoding ----

inline Bytes serialize_encrypted_attrs(const std::vector<EncryptedAttribute>& attrs) {
  std::vector<Bytes> fields;
  fields.reserve(attrs.size() * 3);
  for (const EncryptedAttribute& a : attrs) {
    fields.push_back(a.name);
    fields.push_back(category_name(a.category));
    fields.push_back(serialize_ciphertexts(a.ciphertexts));
  }
  return encode_envelope(0x10, fields);
}

inline std::vector<EncryptedAttribute> parse_encrypted_attrs(const Bytes& data, BackendId backend,
                                                             const EvalPublicKey* key_ctx) {
  auto [tag, fields] = decode_envelope(data);
  if (tag != 0x10 || fields.size() % 3 != 0) throw ParseError("bad attribute block", 0);
  std::vector<EncryptedAttribute> out;
  out.reserve(fields.size() / 3);
  for (std::size_t i = 0; i < fields.size(); i += 3) {
    EncryptedAttribute a;
    a.name = fields[i];
    a.category = category_from_name(fields[i + 1]);
    a.ciphertexts = parse_ciphertexts(fields[i + 2], backend, key_ctx);
    out.push_back(std::move(a));
  }
  return out;
}

// ---- Transport and tracing seams ----

class Channel {
 public:
  virtual ~Channel() = default;
  // Delivers wire bytes from one principal to another, possibly modified
  // by an adversary; nullopt means the message was dropped in transit.
  virtual std::optional<Bytes> send(const std::string& from, const std::string& to,
                                    MsgType type, const Bytes& wire) = 0;
};

// In-process pass-through for tests that do not need a simulator.
class DirectChannel final : public Channel {
 public:
  std::optional<Bytes> send(const std::string&, const std::string&, MsgType,
                            const Bytes& wire) override {
    return wire;
  }
};

struct StepRecord {
  std::string agent;
  std::string action;
  std::string detail;
  std::string state_digest;  // hex digest of the agent's state after the step
};

class ProtocolTrace {
 public:
  virtual ~ProtocolTrace() = default;
  virtual void on_step(const StepRecord& step) = 0;
};

class NullTrace final : public ProtocolTrace {
 public:
  void on_step(const StepRecord&) override {}
};

// ---- Agents ----

struct UserAgent {
  std::string principal_id;
  AuthKeyPair auth;
  std::optional<EvalKeyPair> eval;  // full pair for protocol participants
  bool administrator = false;

  // Administrator-only state: the plaintext policy and the partners' auth
  // public keys, needed to (re)issue subject-fingerprint rule values.
  std::optional<PolicyRuleBase> policy;
  std::map<std::string, AuthPublicKey> partner_auth;

  std::uint64_t seed = 0;  // root of this agent's encryption randomness
  std::uint64_t op_counter = 0;

  std::uint64_t next_seed() { return derive_seed(seed, op_counter++); }

  const EvalKeyPair& eval_keys() const {
    if (!eval) throw Error("principal '" + principal_id + "' holds no eval key pair");
    return *eval;
  }

  std::string state_digest() const {
    std::string s = principal_id + "|" + serialize_auth_public(auth.public_key) + "|";
    if (eval) s += eval->fingerprint().hex();
    s += administrator ? "|admin" : "|partner";
    if (policy) s += "|" + serialize_prb(*policy);
    return digest_hex(digest256(s));
  }
};

class ServerAgent {
 public:
  ServerAgent(std::string id, AuthKeyPair auth, std::uint64_t seed)
      : id_(std::move(id)), auth_(std::move(auth)), seed_(seed) {}

  const std::string& id() const { return id_; }
  const AuthPublicKey& auth_public_key() const { return auth_.public_key; }

  void set_eval_public_key(EvalPublicKey pk) { eval_pk_ = std::move(pk); }
  const EvalPublicKey& eval_public_key() const {
    if (!eval_pk_) throw Error("server has no eval public key configured");
    return *eval_pk_;
  }

  void add_principal(const std::string& principal, AuthPublicKey pk) {
    known_principals_[principal] = std::move(pk);
  }
  const std::map<std::string, AuthPublicKey>& known_principals() const {
    return known_principals_;
  }

  void set_administrator(const std::string& principal) {
    prb_store_ = PrbStore(principal);
  }
  void set_require_signatures(bool on) { require_signatures_ = on; }
  bool signatures_required() const { return require_signatures_; }
  void set_func_id_width(unsigned w) { func_id_width_ = w; }
  unsigned func_id_width() const { return func_id_width_; }

  FunctionRegistry& funcs() { return funcs_; }
  const FunctionRegistry& funcs() const { return funcs_; }
  ResourceStore& resources() { return resources_; }
  const ResourceStore& resources() const { return resources_; }
  PrbStore& prb_store() { return prb_store_; }
  const PrbStore& prb_store() const { return prb_store_; }
  const std::optional<Circuit>& canaccess() const { return canaccess_; }

  // -- message handlers (called with already-decoded messages) --

  std::uint64_t handle_upload(const Message& m, ProtocolTrace& trace) {
    if (m.type != MsgType::UploadData || m.fields.size() != 2) {
      throw ParseError("malformed UploadData", 0);
    }
    authenticate(m, trace);
    const std::string owner = m.fields[0];
    std::vector<Ciphertext> blob =
        parse_ciphertexts(m.fields[1], eval_public_key().backend, &eval_public_key());
    std::uint64_t handle = resources_.store(owner, std::move(blob));
    step(trace, "store", "handle=" + std::to_string(handle) + " owner=" + owner);
    return handle;
  }

  Message handle_op_request(const Message& m, ProtocolTrace& trace) {
    if (m.type != MsgType::OpRequest || m.fields.size() != 6) {
      throw ParseError("malformed OpRequest", 0);
    }
    const AuthPublicKey* requester_pk = authenticate(m, trace);
    const std::string& requester = m.fields[0];
    ProtocolKind kind = protocol_from_name(m.fields[1]);
    const EvalPublicKey& pk = eval_public_key();
    const FheBackend& be = backend_for(pk.backend);

    BitVec func_id = bits_from_hex_width(m.fields[2], func_id_width_);
    const Circuit& func = funcs_.lookup_func(func_id);
    step(trace, "lookup_func", "func=" + m.fields[2]);

    std::uint64_t handle = std::stoull(m.fields[3]);
    const StoredResource& data = resources_.fetch(handle);
    std::vector<Ciphertext> inputs = parse_ciphertexts(m.fields[4], pk.backend, &pk);
    inputs.insert(inputs.end(), data.blob.begin(), data.blob.end());

    std::vector<Ciphertext> result;
    if (kind == ProtocolKind::Mcsp) {
      if (!prb_store_.has_prb() || !canaccess_) {
        throw Error("no PRB installed; MCSP requests cannot be decided");
      }
      if (requester_pk == nullptr) {
        throw SignatureRejected("MCSP requires signed requests");
      }
      const EncryptedPRB& prb = prb_store_.current();
      std::vector<EncryptedAttribute> client_attrs =
          parse_encrypted_attrs(m.fields[5], pk.backend, &pk);
      std::vector<EncryptedAttribute> enc_attrs =
          assemble_attrs(prb, *requester_pk, client_attrs, trace);
      std::vector<Ciphertext> enc_func = be.encrypt_bits(pk, func_id, next_seed());
      Ciphertext decision = verify_access(pk, *canaccess_, enc_attrs, enc_func, prb);
      step(trace, "verify_access", "requester=" + requester);
      std::vector<Ciphertext> outputs = be.evaluate(pk, func, inputs);
      step(trace, "evaluate", "func=" + m.fields[2]);
      result = gate_output(pk, decision, outputs);
      result.insert(result.begin(), decision);  // leading validity bit
      step(trace, "gate_output", "bits=" + std::to_string(result.size()));
    } else {
      std::vector<Ciphertext> outputs = be.evaluate(pk, func, inputs);
      step(trace, "evaluate", "func=" + m.fields[2]);
      result = std::move(outputs);
    }

    Message resp;
    resp.type = MsgType::OpResponse;
    resp.fields = {id_, serialize_ciphertexts(result)};
    if (require_signatures_) {
      sign_envelope(resp, auth_);
      step(trace, "sign_response", "to=" + requester);
    }
    return resp;
  }

  void handle_prb_upload(const Message& m, ProtocolTrace& trace) {
    if ((m.type != MsgType::PrbUpload && m.type != MsgType::PrbUpdate) ||
        m.fields.size() != 2) {
      throw ParseError("malformed PRB upload", 0);
    }
    const std::string& requester = m.fields[0];
    auto it = known_principals_.find(m.signer);
    if (m.signer.empty() || it == known_principals_.end() || m.signer != requester) {
      throw SignatureRejected("PRB upload not signed by a known principal");
    }
    EncryptedPRB prb =
        parse_encrypted_prb(m.fields[1], eval_public_key().backend, &eval_public_key());
    prb_store_.update(requester, it->second, message_payload(m), m.signature, std::move(prb));
    canaccess_ = compile_canaccess(prb_store_.current().shape());
    step(trace, "install_prb",
         "rules=" + std::to_string(prb_store_.current().rule_bits.size()) +
             " audit=" + std::to_string(prb_store_.audit().size()));
  }

  void handle_rekey_announce(const Message& m, ProtocolTrace& trace) {
    if (m.type != MsgType::RekeyAnnounce || m.fields.size() != 2) {
      throw ParseError("malformed RekeyAnnounce", 0);
    }
    authenticate(m, trace);  // signed with the currently known (old) key
    const std::string& principal = m.fields[0];
    if (m.signer != principal) {
      throw SignatureRejected("rekey announcement signer mismatch");
    }
    AuthPublicKey new_pk = parse_auth_public(m.fields[1]);
    known_principals_[principal] = new_pk;
    step(trace, "rekey", "principal=" + principal);
  }

  // Server-side half of homomorphic re-encryption: evaluate the backend's
  // decryption circuit under the new key, feeding it the old secret key
  // bits (supplied encrypted under the new key) and the old ciphertext
  // bits (public to the server, so it encrypts them itself).
  void handle_reencrypt(const Message& m, ProtocolTrace& trace) {
    if (m.type != MsgType::ReencryptRequest || m.fields.size() != 4) {
      throw ParseError("malformed ReencryptRequest", 0);
    }
    authenticate(m, trace);
    const std::string& requester = m.fields[0];
    if (requester != prb_admin_or(requester)) {
      throw NotAdministrator("re-encryption is an administrative operation");
    }
    const EvalPublicKey old_pk = eval_public_key();
    EvalPublicKey new_pk = parse_eval_public(m.fields[2], old_pk.backend);
    const FheBackend& be = backend_for(new_pk.backend);
    std::optional<Circuit> dec = be.decryption_circuit();
    if (!dec) {
      throw DepthExceeded("backend decryption circuit exceeds the supported depth");
    }
    std::vector<Ciphertext> enc_sk = parse_ciphertexts(m.fields[3], new_pk.backend, &new_pk);
    const unsigned ct_bits = dec->num_inputs - static_cast<unsigned>(enc_sk.size());
    for (std::uint64_t h : resources_.handles()) {
      const StoredResource& res = resources_.fetch(h);
      std::vector<Ciphertext> fresh;
      fresh.reserve(res.blob.size());
      for (const Ciphertext& old_ct : res.blob) {
        std::vector<Ciphertext> in = enc_sk;
        for (unsigned k = 0; k < ct_bits; ++k) {
          Bit b = static_cast<Bit>((old_ct.value >> k) & 1);
          in.push_back(be.encrypt_bit(new_pk, b, next_seed()));
        }
        fresh.push_back(be.evaluate(new_pk, *dec, in)[0]);
      }
      resources_.replace_blob(h, std::move(fresh));
    }
    eval_pk_ = std::move(new_pk);
    step(trace, "reencrypt", "strategy=" + m.fields[1] +
                                 " resources=" + std::to_string(resources_.size()));
  }

  std::uint64_t next_seed() { return derive_seed(seed_, op_counter_++); }

  // Structural dump of everything the server can see, as (field class,
  // rendering) pairs. The leakage scan asserts that no entry is classed
  // as a plaintext bit or an eval secret key — neither class exists here
  // by construction.
  std::vector<std::pair<std::string, std::string>> dump_state() const {
    std::vector<std::pair<std::string, std::string>> out;
    out.emplace_back("principal_id", id_);
    out.emplace_back("auth_public_key", "self:" + serialize_auth_public(auth_.public_key));
    for (const auto& [principal, pk] : known_principals_) {
      out.emplace_back("auth_public_key", principal + ":" + serialize_auth_public(pk));
    }
    if (eval_pk_) {
      out.emplace_back("eval_public_key", serialize_eval_public(*eval_pk_));
    }
    for (std::uint64_t h : resources_.handles()) {
      const StoredResource& res = resources_.fetch(h);
      out.emplace_back("handle_metadata", "handle=" + std::to_string(h) + " owner=" +
                                              res.owner + " bits=" +
                                              std::to_string(res.blob.size()));
      for (const Ciphertext& ct : res.blob) {
        out.emplace_back("ciphertext", bigint_to_hex(ct.value));
      }
    }
    if (prb_store_.has_prb()) {
      const EncryptedPRB& prb = prb_store_.current();
      for (const SchemaEntry& e : prb.schema) {
        out.emplace_back("prb_schema", e.name + " " + std::to_string(e.width) + " " +
                                           category_name(e.category));
      }
      out.emplace_back("prb_shape", "rules=" + std::to_string(prb.rule_bits.size()) +
                                        " func_id_width=" +
                                        std::to_string(prb.func_id_width) +
                                        " func_slots=" + std::to_string(prb.func_slots));
      for (const std::vector<Ciphertext>& rule : prb.rule_bits) {
        for (const Ciphertext& ct : rule) {
          out.emplace_back("ciphertext", bigint_to_hex(ct.value));
        }
      }
    }
    if (canaccess_) {
      out.emplace_back("circuit_shape", "canaccess inputs=" +
                                            std::to_string(canaccess_->num_inputs) + " gates=" +
                                            std::to_string(canaccess_->gates.size()));
    }
    return out;
  }

  std::string state_digest() const {
    std::string s = id_;
    for (const auto& [cls, val] : dump_state()) s += "|" + cls + "=" + val;
    return digest_hex(digest256(s));
  }

 private:
  // Returns the requester's auth key if the message was verifiably signed
  // by a known principal; throws SignatureRejected when signatures are
  // required and the check fails. Returns nullptr in unsigned mode.
  const AuthPublicKey* authenticate(const Message& m, ProtocolTrace& trace) {
    if (!require_signatures_ && !m.signed_()) {
      step(trace, "accept_unsigned", msg_type_name(m.type));
      return nullptr;
    }
    auto it = known_principals_.find(m.signer);
    if (m.signer.empty() || it == known_principals_.end()) {
      throw SignatureRejected("signer '" + m.signer + "' is not a known principal");
    }
    if (!verify(it->second, message_payload(m), m.signature)) {
      throw SignatureRejected("signature of '" + m.signer + "' did not verify");
    }
    step(trace, "verify_sig", "signer=" + m.signer + " type=" + msg_type_name(m.type));
    return &it->second;
  }

  // Schema-ordered attribute assembly: subject attributes are derived from
  // the authenticated requester's key; others must come from the client.
  std::vector<EncryptedAttribute> assemble_attrs(
      const EncryptedPRB& prb, const AuthPublicKey& requester_pk,
      const std::vector<EncryptedAttribute>& client_attrs, ProtocolTrace& trace) {
    const EvalPublicKey& pk = eval_public_key();
    const FheBackend& be = backend_for(pk.backend);
    std::vector<EncryptedAttribute> out;
    out.reserve(prb.schema.size());
    for (const SchemaEntry& e : prb.schema) {
      if (e.category == AttrCategory::Subject) {
        AttributeValue fp = fingerprint_subject(requester_pk, e.width, e.name);
        EncryptedAttribute ea;
        ea.name = e.name;
        ea.category = e.category;
        ea.ciphertexts = be.encrypt_bits(pk, fp.bits, next_seed());
        out.push_back(std::move(ea));
        step(trace, "encrypt_subject_attr", e.name);
      } else {
        const EncryptedAttribute* found = nullptr;
        for (const EncryptedAttribute& a : client_attrs) {
          if (a.name == e.name) {
            found = &a;
            break;
          }
        }
        if (found == nullptr) {
          throw ShapeError("request is missing attribute '" + e.name + "'");
        }
        out.push_back(*found);
      }
    }
    return out;
  }

  const std::string& prb_admin_or(const std::string& fallback) const {
    return prb_store_.administrator().empty() ? fallback : prb_store_.administrator();
  }

  void step(ProtocolTrace& trace, const std::string& action, const std::string& detail) {
    trace.on_step(StepRecord{id_, action, detail, state_digest()});
  }

  std::string id_;
  AuthKeyPair auth_;
  std::uint64_t seed_;
  std::uint64_t op_counter_ = 0;
  std::map<std::string, AuthPublicKey> known_principals_;
  std::optional<EvalPublicKey> eval_pk_;  // never the secret half
  ResourceStore resources_;
  FunctionRegistry funcs_;
  PrbStore prb_store_;
  std::optional<Circuit> canaccess_;
  bool require_signatures_ = true;
  unsigned func_id_width_ = 2;
};

// ---- Client-side orchestration ----

namespace detail {

inline Message deliver(Channel& ch, const std::string& from, const std::string& to,
                       const Message& m) {
  std::optional<Bytes> wire = ch.send(from, to, m.type, encode_message(m));
  if (!wire) throw Error("message from '" + from + "' to '" + to + "' was dropped");
  return decode_message(*wire);
}

inline void user_step(ProtocolTrace& trace, const UserAgent& u, const std::string& action,
                      const std::string& detail) {
  trace.on_step(StepRecord{u.principal_id, action, detail, u.state_digest()});
}

}  // namespace detail

inline std::uint64_t upload_data(UserAgent& owner, ServerAgent& server, Channel& ch,
                                 ProtocolTrace& trace, const BitVec& data_bits) {
  const EvalKeyPair& ek = owner.eval_keys();
  const FheBackend& be = backend_for(ek.public_key.backend);
  std::vector<Ciphertext> blob = be.encrypt_bits(ek.public_key, data_bits, owner.next_seed());
  detail::user_step(trace, owner, "encrypt_data", std::to_string(data_bits.size()) + " bits");
  Message m;
  m.type = MsgType::UploadData;
  m.fields = {owner.principal_id, serialize_ciphertexts(blob)};
  if (server.signatures_required()) sign_envelope(m, owner.auth);
  return server.handle_upload(detail::deliver(ch, owner.principal_id, server.id(), m), trace);
}

inline Message build_op_request(UserAgent& user, ProtocolKind kind, const BitVec& func_id,
                                std::uint64_t data_handle, const BitVec& input_bits,
                                const std::vector<AttributeValue>& request_attrs,
                                bool sign_it) {
  const EvalKeyPair& ek = user.eval_keys();
  const FheBackend& be = backend_for(ek.public_key.backend);
  std::vector<Ciphertext> inputs = be.encrypt_bits(ek.public_key, input_bits, user.next_seed());
  Bytes attrs_blob;
  if (kind == ProtocolKind::Mcsp) {
    attrs_blob = serialize_encrypted_attrs(
        encrypt_attributes(ek.public_key, request_attrs, user.next_seed()));
  }
  Message m;
  m.type = MsgType::OpRequest;
  m.fields = {user.principal_id, protocol_name(kind),         bits_to_hex(func_id),
              std::to_string(data_handle), serialize_ciphertexts(inputs), attrs_blob};
  if (sign_it) sign_envelope(m, user.auth);
  return m;
}

// Shared request/response round trip; decrypts and returns the raw
// response bits. The caller interprets MCSP framing.
inline BitVec op_round_trip(UserAgent& user, ServerAgent& server, Channel& ch,
                            ProtocolTrace& trace, const Message& request) {
  if (request.signed_()) {
    detail::user_step(trace, user, "sign_request", msg_type_name(request.type));
  }
  Message delivered = detail::deliver(ch, user.principal_id, server.id(), request);
  Message response = server.handle_op_request(delivered, trace);
  Message resp_delivered = detail::deliver(ch, server.id(), user.principal_id, response);
  if (server.signatures_required()) {
    if (!verify(server.auth_public_key(), message_payload(resp_delivered),
                resp_delivered.signature)) {
      throw ServerSignatureInvalid("response signature did not verify");
    }
    detail::user_step(trace, user, "verify_response", "from=" + server.id());
  }
  const EvalKeyPair& ek = user.eval_keys();
  std::vector<Ciphertext> result = parse_ciphertexts(
      resp_delivered.fields.at(1), ek.public_key.backend, &ek.public_key);
  BitVec bits = backend_for(ek.public_key.backend).decrypt_bits(ek.secret_key, result);
  detail::user_step(trace, user, "decrypt", std::to_string(bits.size()) + " bits");
  return bits;
}

inline BitVec basic_run(UserAgent& user, ServerAgent& server, Channel& ch, ProtocolTrace& trace,
                        const BitVec& func_id, std::uint64_t data_handle,
                        const BitVec& input_bits) {
  Message req = build_op_request(user, ProtocolKind::Basic, func_id, data_handle, input_bits,
                                 {}, server.signatures_required());
  return op_round_trip(user, server, ch, trace, req);
}

inline BitVec mssp_run(UserAgent& user, ServerAgent& server, Channel& ch, ProtocolTrace& trace,
                       const BitVec& func_id, std::uint64_t data_handle,
                       const BitVec& input_bits) {
  Message req =
      build_op_request(user, ProtocolKind::Mssp, func_id, data_handle, input_bits, {}, true);
  return op_round_trip(user, server, ch, trace, req);
}

struct McspOutcome {
  bool granted = false;
  BitVec bits;  // empty when denied
};

inline McspOutcome mcsp_run(UserAgent& user, ServerAgent& server, Channel& ch,
                            ProtocolTrace& trace, const BitVec& func_id,
                            std::uint64_t data_handle, const BitVec& input_bits,
                            const std::vector<AttributeValue>& request_attrs) {
  Message req = build_op_request(user, ProtocolKind::Mcsp, func_id, data_handle, input_bits,
                                 request_attrs, true);
  BitVec raw = op_round_trip(user, server, ch, trace, req);
  if (raw.empty()) throw Error("MCSP response was empty");
  McspOutcome out;
  out.granted = raw[0] == 1;  // leading validity bit
  if (out.granted) out.bits.assign(raw.begin() + 1, raw.end());
  detail::user_step(trace, user, "check_validity", out.granted ? "granted" : "denied");
  return out;
}

// ---- Policy administration ----

inline void upload_prb(UserAgent& admin, ServerAgent& server, Channel& ch, ProtocolTrace& trace,
                       bool initial = true) {
  if (!admin.policy) throw Error("administrator holds no policy");
  admin.policy->validate();
  EncryptedPRB enc =
      encrypt_prb(admin.eval_keys().public_key, *admin.policy, admin.next_seed());
  detail::user_step(trace, admin, "encrypt_prb",
                    "rules=" + std::to_string(admin.policy->rules.size()));
  Message m;
  m.type = initial ? MsgType::PrbUpload : MsgType::PrbUpdate;
  m.fields = {admin.principal_id, serialize_encrypted_prb(enc)};
  sign_envelope(m, admin.auth);
  server.handle_prb_upload(detail::deliver(ch, admin.principal_id, server.id(), m), trace);
}

// ---- Key lifecycle ----

// The user announces a fresh auth key (signed with the old one); the
// administrator re-issues every subject-fingerprint rule value that named
// the old key and uploads the updated encrypted PRB.
inline AuthKeyPair rotate_auth_key(UserAgent& user, UserAgent& admin, ServerAgent& server,
                                   Channel& ch, ProtocolTrace& trace, std::uint64_t new_seed) {
  if (!admin.administrator) {
    throw NotAdministrator("'" + admin.principal_id + "' cannot re-issue the PRB");
  }
  AuthKeyPair fresh = auth_keygen(new_seed, user.principal_id);
  Message m;
  m.type = MsgType::RekeyAnnounce;
  m.fields = {user.principal_id, serialize_auth_public(fresh.public_key)};
  sign_envelope(m, user.auth);  // proves control of the current key
  server.handle_rekey_announce(detail::deliver(ch, user.principal_id, server.id(), m), trace);

  AuthKeyPair old = user.auth;
  user.auth = fresh;
  detail::user_step(trace, user, "rotate_auth_key", "new key installed");

  if (admin.policy) {
    bool changed = false;
    for (const SchemaEntry& e : admin.policy->schema) {
      if (e.category != AttrCategory::Subject) continue;
      BitVec old_fp = fingerprint_subject(old.public_key, e.width, e.name).bits;
      BitVec new_fp = fingerprint_subject(fresh.public_key, e.width, e.name).bits;
      for (PolicyRule& rule : admin.policy->rules) {
        for (Predicate& p : rule.predicates) {
          if (p.attr_name == e.name && p.required_bits == old_fp) {
            p.required_bits = new_fp;
            changed = true;
          }
        }
      }
    }
    admin.partner_auth[user.principal_id] = fresh.public_key;
    if (changed) upload_prb(admin, server, ch, trace, /*initial=*/false);
  }
  return fresh;
}

// Drops every rule whose subject fingerprint names the revoked principal;
// the principal stays legible (can still authenticate) but all requests
// decrypt to the denied sentinel from then on.
inline void revoke_user(UserAgent& admin, ServerAgent& server, Channel& ch,
                        ProtocolTrace& trace, const std::string& principal_id) {
  if (!admin.administrator) {
    throw NotAdministrator("'" + admin.principal_id + "' cannot revoke principals");
  }
  if (!admin.policy) throw Error("administrator holds no policy");
  auto it = admin.partner_auth.find(principal_id);
  if (it == admin.partner_auth.end()) {
    detail::user_step(trace, admin, "revoke_user", principal_id + " unknown; no-op");
    return;
  }
  bool changed = false;
  for (const SchemaEntry& e : admin.policy->schema) {
    if (e.category != AttrCategory::Subject) continue;
    BitVec fp = fingerprint_subject(it->second, e.width, e.name).bits;
    std::vector<PolicyRule> kept;
    for (PolicyRule& rule : admin.policy->rules) {
      bool names_revoked = false;
      for (const Predicate& p : rule.predicates) {
        if (p.attr_name == e.name && p.required_bits == fp) names_revoked = true;
      }
      if (names_revoked) {
        changed = true;
      } else {
        kept.push_back(std::move(rule));
      }
    }
    admin.policy->rules = std::move(kept);
  }
  detail::user_step(trace, admin, "revoke_user",
                    principal_id + (changed ? " rules removed" : " had no rules"));
  if (changed) upload_prb(admin, server, ch, trace, /*initial=*/false);
}

enum class ReencryptStrategy : std::uint8_t { OracleRotation = 0, HomomorphicRotation = 1 };

inline const char* strategy_name(ReencryptStrategy s) {
  return s == ReencryptStrategy::OracleRotation ? "oracle_rotation" : "homomorphic_rotation";
}

// Re-encrypts every stored blob from the current eval key to `new_eval`.
// oracle_rotation decrypts and re-encrypts at the trusted administrator;
// homomorphic_rotation performs server-side key switching through the
// backend's decryption circuit and fails with DepthExceeded when the
// backend cannot express decryption within its depth budget (the toy
// scheme cannot; the clear scheme trivially can). The administrator's own
// eval pair is switched; partners receive the new pair out-of-band.
inline void reencrypt_data(UserAgent& admin, ServerAgent& server, Channel& ch,
                           ProtocolTrace& trace, ReencryptStrategy strategy,
                           const EvalKeyPair& new_eval) {
  if (!admin.administrator) {
    throw NotAdministrator("'" + admin.principal_id + "' cannot request re-encryption");
  }
  const EvalKeyPair& old_eval = admin.eval_keys();
  const FheBackend& be = backend_for(old_eval.public_key.backend);

  if (strategy == ReencryptStrategy::OracleRotation) {
    for (std::uint64_t h : server.resources().handles()) {
      const StoredResource& res = server.resources().fetch(h);
      BitVec plain = be.decrypt_bits(old_eval.secret_key, res.blob);
      std::vector<Ciphertext> fresh =
          be.encrypt_bits(new_eval.public_key, plain, admin.next_seed());
      server.resources().replace_blob(h, std::move(fresh));
    }
    server.set_eval_public_key(new_eval.public_key);
    detail::user_step(trace, admin, "reencrypt_oracle",
                      "resources=" + std::to_string(server.resources().size()));
  } else {
    std::optional<Circuit> dec = be.decryption_circuit();
    if (!dec) {
      throw DepthExceeded("backend decryption circuit exceeds the supported depth");
    }
    // Old secret key bits travel encrypted under the new public key; the
    // server never sees them in clear.
    const unsigned sk_bits = dec->num_inputs - 1;  // one ciphertext bit per evaluation
    BitVec sk_vec;
    sk_vec.reserve(sk_bits);
    for (unsigned k = 0; k < sk_bits; ++k) {
      sk_vec.push_back(static_cast<Bit>((old_eval.secret_key.secret >> k) & 1));
    }
    std::vector<Ciphertext> enc_sk =
        be.encrypt_bits(new_eval.public_key, sk_vec, admin.next_seed());
    Message m;
    m.type = MsgType::ReencryptRequest;
    m.fields = {admin.principal_id, strategy_name(strategy),
                serialize_eval_public(new_eval.public_key), serialize_ciphertexts(enc_sk)};
    sign_envelope(m, admin.auth);
    server.handle_reencrypt(detail::deliver(ch, admin.principal_id, server.id(), m), trace);
  }
  admin.eval = new_eval;
  detail::user_step(trace, admin, "install_eval_key", new_eval.fingerprint().hex());
}

}  // namespace oblivion
