#pragma once

// Deterministic in-memory network: a FIFO-reliable bus that records every
// message and protocol step into a replayable transcript, plus the Mallory
// adversary harness. The bus is the protocol module's Channel; the
// transcript is its ProtocolTrace.
//
// The network model is intentionally minimal: no loss, reordering, or
// timing — every attack of interest is logical. Messages travel in the
// clear (the underlying protocols assume a secure channel for
// confidentiality against outsiders; the adversary here is a participant
// or the server's snoop, not a wiretap model).
//
// Transcript format: JSON Lines. Message lines carry a payload digest and
// delivery status; step lines carry the acting agent, action, and a digest
// of that agent's state after the step. Re-running a scenario from the
// same seeds reproduces the transcript byte-for-byte.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "oblivion/protocol.hpp"

namespace oblivion {

struct AdversaryConfig {
  bool inject_request = false;
  bool replay = false;
  bool tamper_payload = false;
  std::optional<MsgType> tamper_target;       // defaults to OpResponse when tampering
  std::optional<std::string> steal_auth_sk;   // principal whose auth secret leaked
  bool steal_eval_sk = false;
  bool read_server_state = false;

  bool any() const {
    return inject_request || replay || tamper_payload || steal_auth_sk.has_value() ||
           steal_eval_sk || read_server_state;
  }
};

struct EnvelopeRecord {
  std::uint64_t seq = 0;
  std::string sender;
  std::string receiver;
  std::string type;
  std::string payload_digest;  // hex digest of the bytes as delivered
  std::string status;          // delivered | dropped | tampered | injected | replayed
};

struct TranscriptLine {
  bool is_message = false;
  EnvelopeRecord envelope;
  StepRecord step;
};

class Transcript final : public ProtocolTrace {
 public:
  void on_step(const StepRecord& s) override {
    lines_.push_back(TranscriptLine{false, {}, s});
  }

  void on_message(EnvelopeRecord env) {
    lines_.push_back(TranscriptLine{true, std::move(env), {}});
  }

  std::uint64_t next_seq() { return seq_++; }

  const std::vector<TranscriptLine>& lines() const { return lines_; }

  // Index of the first step with this action (optionally by one agent).
  std::optional<std::size_t> first_step(const std::string& action,
                                        const std::string& agent = {}) const {
    for (std::size_t i = 0; i < lines_.size(); ++i) {
      if (lines_[i].is_message) continue;
      if (lines_[i].step.action != action) continue;
      if (!agent.empty() && lines_[i].step.agent != agent) continue;
      return i;
    }
    return std::nullopt;
  }

  bool has_step(const std::string& action, const std::string& agent = {}) const {
    return first_step(action, agent).has_value();
  }

  std::size_t count_steps(const std::string& action) const {
    std::size_t n = 0;
    for (const TranscriptLine& l : lines_) {
      if (!l.is_message && l.step.action == action) ++n;
    }
    return n;
  }

  std::string to_jsonl() const {
    std::string out;
    for (const TranscriptLine& l : lines_) {
      nlohmann::json j;
      if (l.is_message) {
        j["kind"] = "message";
        j["seq"] = l.envelope.seq;
        j["from"] = l.envelope.sender;
        j["to"] = l.envelope.receiver;
        j["type"] = l.envelope.type;
        j["payload_digest"] = l.envelope.payload_digest;
        j["status"] = l.envelope.status;
      } else {
        j["kind"] = "step";
        j["agent"] = l.step.agent;
        j["action"] = l.step.action;
        j["detail"] = l.step.detail;
        j["state"] = l.step.state_digest;
      }
      out += j.dump() + "\n";
    }
    return out;
  }

 private:
  std::vector<TranscriptLine> lines_;
  std::uint64_t seq_ = 1;
};

// Deterministic payload corruption that keeps the wire framing parseable:
// decode, flip the low bit of the first byte of the largest content field,
// re-encode. Falls back to flipping the middle byte for unparseable input.
inline Bytes tamper_wire(const Bytes& wire) {
  try {
    Message m = decode_message(wire);
    std::size_t target = 0;
    for (std::size_t i = 1; i < m.fields.size(); ++i) {
      if (m.fields[i].size() > m.fields[target].size()) target = i;
    }
    if (!m.fields.empty() && !m.fields[target].empty()) {
      m.fields[target][0] = static_cast<char>(m.fields[target][0] ^ 0x01);
      return encode_message(m);
    }
  } catch (const ParseError&) {
  }
  Bytes out = wire;
  if (!out.empty()) out[out.size() / 2] = static_cast<char>(out[out.size() / 2] ^ 0x01);
  return out;
}

class Bus final : public Channel {
 public:
  explicit Bus(Transcript& transcript, AdversaryConfig config = {})
      : transcript_(transcript), config_(std::move(config)) {}

  const AdversaryConfig& config() const { return config_; }

  std::optional<Bytes> send(const std::string& from, const std::string& to, MsgType type,
                            const Bytes& wire) override {
    Bytes delivered = wire;
    std::string status = "delivered";
    if (config_.tamper_payload && type == tamper_target()) {
      delivered = tamper_wire(wire);
      status = "tampered";
    }
    // A replay-capable adversary snoops request traffic off the bus.
    if (type == MsgType::OpRequest) captured_request_ = delivered;
    record(from, to, type, delivered, status);
    return delivered;
  }

  // Adversary-originated traffic; recorded with its own status.
  Bytes inject(const std::string& as_sender, const std::string& to, MsgType type,
               const Bytes& wire) {
    record(as_sender, to, type, wire, "injected");
    return wire;
  }

  std::optional<Bytes> replay_captured(const std::string& to) {
    if (!config_.replay || !captured_request_) return std::nullopt;
    record("mallory", to, MsgType::OpRequest, *captured_request_, "replayed");
    return captured_request_;
  }

  const std::optional<Bytes>& captured_request() const { return captured_request_; }

 private:
  MsgType tamper_target() const {
    return config_.tamper_target.value_or(MsgType::OpResponse);
  }

  void record(const std::string& from, const std::string& to, MsgType type,
              const Bytes& bytes, const std::string& status) {
    EnvelopeRecord env;
    env.seq = transcript_.next_seq();
    env.sender = from;
    env.receiver = to;
    env.type = msg_type_name(type);
    env.payload_digest = digest_hex(digest256(bytes));
    env.status = status;
    transcript_.on_message(std::move(env));
  }

  Transcript& transcript_;
  AdversaryConfig config_;
  std::optional<Bytes> captured_request_;
};

// ---- Mallory ----

// Everything the adversary holds for a scenario: her own auth pair (never
// known to the server) plus whatever the capability set leaked to her.
struct MalloryKeys {
  AuthKeyPair own_auth;
  std::optional<AuthKeyPair> stolen_auth;
  std::optional<EvalSecretKey> stolen_eval_sk;
};

// Raw decryption that deliberately ignores the fingerprint guard — an
// adversary is not bound by the library's key-matching checks.
inline BitVec adversary_raw_decrypt(const EvalSecretKey& sk,
                                    const std::vector<Ciphertext>& cts) {
  BitVec out;
  out.reserve(cts.size());
  for (const Ciphertext& ct : cts) {
    if (sk.backend == BackendId::Toy) {
      out.push_back(ToyBackend::raw_decrypt(sk.secret, ct.value));
    } else {
      out.push_back(static_cast<Bit>(ct.value & 1));
    }
  }
  return out;
}

inline Message forge_op_request(const AuthKeyPair& signing_key, const EvalPublicKey& eval_pk,
                                ProtocolKind kind, const BitVec& func_id,
                                std::uint64_t data_handle, const BitVec& input_bits,
                                const std::vector<AttributeValue>& request_attrs,
                                std::uint64_t seed) {
  const FheBackend& be = backend_for(eval_pk.backend);
  std::vector<Ciphertext> inputs = be.encrypt_bits(eval_pk, input_bits, seed);
  Bytes attrs_blob;
  if (kind == ProtocolKind::Mcsp) {
    attrs_blob = serialize_encrypted_attrs(
        encrypt_attributes(eval_pk, request_attrs, derive_seed(seed, 1)));
  }
  Message m;
  m.type = MsgType::OpRequest;
  m.fields = {signing_key.principal_id,     protocol_name(kind),
              bits_to_hex(func_id),         std::to_string(data_handle),
              serialize_ciphertexts(inputs), attrs_blob};
  sign_envelope(m, signing_key);
  return m;
}

struct InjectOutcome {
  bool rejected = false;
  std::string error;                     // error class name when rejected
  std::vector<Ciphertext> response_cts;  // what Mallory captured when accepted
};

// Drives a forged/injected request into the server and reports how it
// ended: rejection (with the error class) or acceptance (with the
// response ciphertexts the adversary now holds).
inline InjectOutcome mallory_inject(Bus& bus, ServerAgent& server, Transcript& transcript,
                                    const Message& forged) {
  InjectOutcome out;
  Bytes wire = bus.inject("mallory", server.id(), forged.type, encode_message(forged));
  try {
    Message resp = server.handle_op_request(decode_message(wire), transcript);
    out.response_cts = parse_ciphertexts(resp.fields.at(1), server.eval_public_key().backend,
                                         &server.eval_public_key());
  } catch (const SignatureRejected& e) {
    out.rejected = true;
    out.error = "SignatureRejected";
  } catch (const UnknownFunc& e) {
    out.rejected = true;
    out.error = "UnknownFunc";
  } catch (const Error& e) {
    out.rejected = true;
    out.error = "Error";
  }
  return out;
}

// Replays the last legitimately captured request verbatim.
inline InjectOutcome mallory_replay(Bus& bus, ServerAgent& server, Transcript& transcript) {
  InjectOutcome out;
  std::optional<Bytes> wire = bus.replay_captured(server.id());
  if (!wire) {
    out.rejected = true;
    out.error = "NothingCaptured";
    return out;
  }
  try {
    Message resp = server.handle_op_request(decode_message(*wire), transcript);
    out.response_cts = parse_ciphertexts(resp.fields.at(1), server.eval_public_key().backend,
                                         &server.eval_public_key());
  } catch (const SignatureRejected&) {
    out.rejected = true;
    out.error = "SignatureRejected";
  }
  return out;
}

// ---- Server-state leakage scan ----

struct LeakageReport {
  // (field class, rendering) pairs straight from the server's state dump.
  std::vector<std::pair<std::string, std::string>> fields;

  std::map<std::string, std::size_t> class_counts() const {
    std::map<std::string, std::size_t> counts;
    for (const auto& [cls, _] : fields) ++counts[cls];
    return counts;
  }

  bool contains_class(const std::string& cls) const {
    for (const auto& [c, _] : fields) {
      if (c == cls) return true;
    }
    return false;
  }
};

// Structural scan of everything a server-compromising adversary can see.
// Empty report when the capability is absent. The assertion that matters:
// field classes never include plaintext bits or an eval secret key.
inline LeakageReport mallory_read_server(const AdversaryConfig& config,
                                         const ServerAgent& server) {
  LeakageReport report;
  if (!config.read_server_state) return report;
  report.fields = server.dump_state();
  return report;
}

}  // namespace oblivion
