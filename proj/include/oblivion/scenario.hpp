#pragma once

// Scenario files describe a full protocol run as data: principals and
// their key seeds, the shared eval key, registered functions, data items,
// an optional policy rule base, the adversary's capabilities, and an
// ordered script of actions. Every action carries its expected outcome, so
// attack scenarios pass by failing in exactly the predicted way.
//
// The runner wires the agents to the simulated bus, executes the script,
// and reports per-action PASS/FAIL plus the transcript. Everything is
// seeded; two runs of the same spec produce byte-identical transcripts.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "oblivion/io.hpp"
#include "oblivion/simnet.hpp"

namespace oblivion {

struct ScenarioPrincipal {
  std::string id;
  std::uint64_t auth_seed = 0;
  std::uint64_t seed = 0;  // encryption randomness root
  bool administrator = false;
  bool shares_eval_key = true;
};

struct ScenarioFunction {
  BitVec id;
  std::string circuit_file;  // relative to the scenario file, or
  std::string builtin;       // identity | adder | equality | mux
  unsigned width = 0;
};

struct ScenarioData {
  std::string label;
  std::string owner;
  BitVec bits;
};

struct ScenarioSpec {
  std::string name;
  BackendId backend = BackendId::Clear;
  std::optional<SchemeParams> params;
  ProtocolKind default_protocol = ProtocolKind::Mssp;

  std::string server_id = "sally";
  std::uint64_t server_auth_seed = 0;
  std::uint64_t server_seed = 0;
  bool require_signatures = true;
  unsigned func_id_width = 2;

  std::vector<ScenarioPrincipal> principals;
  std::uint64_t eval_seed = 0;

  std::vector<ScenarioFunction> functions;
  std::vector<ScenarioData> data;
  std::optional<PolicyRuleBase> prb;

  AdversaryConfig adversary;
  std::uint64_t adversary_auth_seed = 0;
  std::uint64_t adversary_seed = 0;

  nlohmann::json script;  // array of action objects

  const ScenarioPrincipal* find_principal(const std::string& id) const {
    for (const ScenarioPrincipal& p : principals) {
      if (p.id == id) return &p;
    }
    return nullptr;
  }
};

namespace detail {

inline BitVec json_bits(const nlohmann::json& j, std::size_t step) {
  if (!j.contains("hex") || !j.contains("width")) {
    throw ScenarioError("bit value needs 'hex' and 'width'", step);
  }
  try {
    return bits_from_hex_width(j.at("hex").get<std::string>(), j.at("width").get<unsigned>());
  } catch (const std::exception& e) {
    throw ScenarioError(e.what(), step);
  }
}

inline Circuit builtin_circuit(const std::string& name, unsigned width, std::size_t step) {
  if (name == "identity") return build_identity(width);
  if (name == "adder") return build_adder(width);
  if (name == "equality") return build_equality(width);
  if (name == "mux") return build_mux(width);
  throw ScenarioError("unknown builtin circuit '" + name + "'", step);
}

}  // namespace detail

inline ScenarioSpec parse_scenario(const nlohmann::json& j,
                                   const std::filesystem::path& base_dir) {
  ScenarioSpec spec;
  try {
    spec.name = j.value("name", "scenario");
    spec.backend = backend_from_name(j.value("backend", "clear"));
    if (j.contains("params")) {
      std::istringstream in(j.at("params").get<std::string>());
      SchemeParams p{};
      char c1 = 0, c2 = 0;
      if (!(in >> p.secret_bits >> c1 >> p.noise_bits >> c2 >> p.pk_elements) || c1 != ',' ||
          c2 != ',') {
        throw ScenarioError("params must be '<secret_bits>,<noise_bits>,<pk_elements>'", 0);
      }
      spec.params = p;
    }
    spec.default_protocol = protocol_from_name(j.value("protocol", "mssp"));

    if (j.contains("server")) {
      const nlohmann::json& s = j.at("server");
      spec.server_id = s.value("id", "sally");
      spec.server_auth_seed = s.value("auth_seed", std::uint64_t{1000});
      spec.server_seed = s.value("seed", std::uint64_t{2000});
      spec.require_signatures = s.value("require_signatures", true);
      spec.func_id_width = s.value("func_id_width", 2u);
    }

    for (const nlohmann::json& p : j.value("principals", nlohmann::json::array())) {
      ScenarioPrincipal sp;
      sp.id = p.at("id").get<std::string>();
      sp.auth_seed = p.at("auth_seed").get<std::uint64_t>();
      sp.seed = p.value("seed", sp.auth_seed + 100);
      sp.administrator = p.value("administrator", false);
      sp.shares_eval_key = p.value("shares_eval_key", true);
      spec.principals.push_back(std::move(sp));
    }

    spec.eval_seed = j.value("eval_seed", std::uint64_t{500});

    for (const nlohmann::json& f : j.value("functions", nlohmann::json::array())) {
      ScenarioFunction sf;
      sf.id = bits_from_hex_width(f.at("id").get<std::string>(), spec.func_id_width);
      if (f.contains("circuit")) {
        sf.circuit_file = (base_dir / f.at("circuit").get<std::string>()).string();
      } else {
        sf.builtin = f.at("builtin").get<std::string>();
        sf.width = f.at("width").get<unsigned>();
      }
      spec.functions.push_back(std::move(sf));
    }

    for (const nlohmann::json& d : j.value("data", nlohmann::json::array())) {
      ScenarioData sd;
      sd.label = d.at("label").get<std::string>();
      sd.owner = d.at("owner").get<std::string>();
      sd.bits = detail::json_bits(d, 0);
      spec.data.push_back(std::move(sd));
    }

    if (j.contains("prb")) {
      std::string file = j.at("prb").at("file").get<std::string>();
      spec.prb = parse_prb(read_file(base_dir / file));
    }

    if (j.contains("adversary")) {
      const nlohmann::json& a = j.at("adversary");
      for (const nlohmann::json& cap : a.value("capabilities", nlohmann::json::array())) {
        std::string c = cap.get<std::string>();
        if (c == "inject_request") spec.adversary.inject_request = true;
        else if (c == "replay") spec.adversary.replay = true;
        else if (c == "tamper_payload") spec.adversary.tamper_payload = true;
        else if (c == "steal_eval_sk") spec.adversary.steal_eval_sk = true;
        else if (c == "read_server_state") spec.adversary.read_server_state = true;
        else throw ScenarioError("unknown adversary capability '" + c + "'", 0);
      }
      if (a.contains("steal_auth_sk")) {
        spec.adversary.steal_auth_sk = a.at("steal_auth_sk").get<std::string>();
      }
      if (a.contains("tamper_target")) {
        std::string t = a.at("tamper_target").get<std::string>();
        if (t == "OpRequest") spec.adversary.tamper_target = MsgType::OpRequest;
        else if (t == "OpResponse") spec.adversary.tamper_target = MsgType::OpResponse;
        else throw ScenarioError("unknown tamper target '" + t + "'", 0);
      }
      spec.adversary_auth_seed = a.value("auth_seed", std::uint64_t{6666});
      spec.adversary_seed = a.value("seed", std::uint64_t{6667});
    }

    spec.script = j.value("script", nlohmann::json::array());
    if (!spec.script.is_array()) throw ScenarioError("'script' must be an array", 0);
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError(std::string("malformed scenario: ") + e.what(), 0);
  }

  // Structural validation before anything runs.
  for (std::size_t i = 0; i < spec.principals.size(); ++i) {
    for (std::size_t k = i + 1; k < spec.principals.size(); ++k) {
      if (spec.principals[i].id == spec.principals[k].id) {
        throw ScenarioError("duplicate principal '" + spec.principals[i].id + "'", 0);
      }
    }
  }
  std::size_t admins = 0;
  for (const ScenarioPrincipal& p : spec.principals) admins += p.administrator ? 1 : 0;
  if (admins > 1) throw ScenarioError("more than one administrator", 0);
  for (const ScenarioData& d : spec.data) {
    if (spec.find_principal(d.owner) == nullptr) {
      throw ScenarioError("data '" + d.label + "' owned by unknown principal '" + d.owner + "'",
                          0);
    }
  }
  return spec;
}

inline ScenarioSpec load_scenario(const std::filesystem::path& file) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(file));
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError(std::string("scenario is not valid JSON: ") + e.what(), 0);
  }
  return parse_scenario(j, file.parent_path());
}

struct ActionResult {
  std::size_t index = 0;
  std::string action;
  std::string outcome;
  std::string output_hex;  // set when outcome == "output"
  std::string expect;
  std::string expect_hex;
  bool pass = false;

  std::string summary() const {
    std::string s = "step " + std::to_string(index) + " " + action + ": " +
                    (pass ? "PASS" : "FAIL") + " (" + outcome;
    if (!output_hex.empty()) s += " " + output_hex;
    s += ")";
    if (!pass) {
      s += " expected " + expect;
      if (!expect_hex.empty()) s += " " + expect_hex;
    }
    return s;
  }
};

struct ScenarioOutcome {
  std::string name;
  std::vector<ActionResult> results;
  bool all_passed = true;
  Transcript transcript;
};

class ScenarioRunner {
 public:
  explicit ScenarioRunner(ScenarioSpec spec) : spec_(std::move(spec)) {}

  ScenarioOutcome run() {
    setup();
    ScenarioOutcome out;
    out.name = spec_.name;
    std::size_t index = 0;
    for (const nlohmann::json& action : spec_.script) {
      out.results.push_back(run_action(index, action));
      if (!out.results.back().pass) out.all_passed = false;
      ++index;
    }
    out.transcript = std::move(transcript_);
    return out;
  }

 private:
  void setup() {
    const FheBackend& be = backend_for(spec_.backend);
    SchemeParams params = spec_.params.value_or(be.default_params());
    if (spec_.params) params.max_mult_depth = 0;  // derive from the overrides
    eval_ = be.keygen(params, spec_.eval_seed);

    server_.emplace(spec_.server_id, auth_keygen(spec_.server_auth_seed, spec_.server_id),
                    spec_.server_seed);
    server_->set_eval_public_key(eval_->public_key);
    server_->set_require_signatures(spec_.require_signatures);
    server_->set_func_id_width(spec_.func_id_width);

    for (const ScenarioPrincipal& p : spec_.principals) {
      UserAgent agent;
      agent.principal_id = p.id;
      agent.auth = auth_keygen(p.auth_seed, p.id);
      if (p.shares_eval_key) agent.eval = eval_;
      agent.administrator = p.administrator;
      agent.seed = p.seed;
      server_->add_principal(p.id, agent.auth.public_key);
      if (p.administrator) {
        server_->set_administrator(p.id);
        admin_id_ = p.id;
      }
      agents_.emplace(p.id, std::move(agent));
    }
    if (!admin_id_.empty() && spec_.prb) {
      UserAgent& admin = agents_.at(admin_id_);
      admin.policy = spec_.prb;
      for (auto& [id, agent] : agents_) {
        if (id != admin_id_) admin.partner_auth[id] = agent.auth.public_key;
      }
    }

    for (std::size_t i = 0; i < spec_.functions.size(); ++i) {
      const ScenarioFunction& f = spec_.functions[i];
      Circuit c = f.circuit_file.empty()
                      ? detail::builtin_circuit(f.builtin, f.width, 0)
                      : parse_circuit(read_file(f.circuit_file));
      server_->funcs().register_func(f.id, std::move(c));
    }

    bus_.emplace(transcript_, spec_.adversary);

    if (spec_.adversary.any()) {
      mallory_.emplace();
      mallory_->own_auth = auth_keygen(spec_.adversary_auth_seed, "mallory");
      if (spec_.adversary.steal_auth_sk) {
        auto it = agents_.find(*spec_.adversary.steal_auth_sk);
        if (it == agents_.end()) {
          throw ScenarioError("steal_auth_sk names unknown principal '" +
                                  *spec_.adversary.steal_auth_sk + "'",
                              0);
        }
        mallory_->stolen_auth = it->second.auth;
      }
      if (spec_.adversary.steal_eval_sk) mallory_->stolen_eval_sk = eval_->secret_key;
      // Mallory can always generate keys of her own; her best decryption
      // attempt uses the stolen eval secret if she has it, else her own.
      mallory_own_eval_ = be.keygen(params, spec_.adversary_seed);
    }

    // Upload the policy before the script runs; PRB preparation is part of
    // scenario setup, matching the "PRB Preparation" phase.
    if (spec_.prb && !admin_id_.empty()) {
      upload_prb(agents_.at(admin_id_), *server_, *bus_, transcript_, /*initial=*/true);
    }
  }

  UserAgent& agent_or_throw(const std::string& id, std::size_t step) {
    auto it = agents_.find(id);
    if (it == agents_.end()) throw ScenarioError("unknown principal '" + id + "'", step);
    return it->second;
  }

  const ScenarioData& data_or_throw(const std::string& label, std::size_t step) {
    for (const ScenarioData& d : spec_.data) {
      if (d.label == label) return d;
    }
    throw ScenarioError("unknown data label '" + label + "'", step);
  }

  std::uint64_t handle_or_throw(const std::string& label, std::size_t step) {
    auto it = handles_.find(label);
    if (it == handles_.end()) {
      throw ScenarioError("data '" + label + "' has not been uploaded", step);
    }
    return it->second;
  }

  const Circuit& func_or_throw(const BitVec& id, std::size_t step) {
    if (!server_->funcs().contains(id)) {
      throw ScenarioError("func " + bits_to_hex(id) + " is not registered", step);
    }
    return server_->funcs().lookup_func(id);
  }

  static std::vector<AttributeValue> parse_attrs(const nlohmann::json& action,
                                                 std::size_t step) {
    std::vector<AttributeValue> attrs;
    for (const nlohmann::json& a : action.value("attrs", nlohmann::json::array())) {
      AttributeValue v;
      v.name = a.at("name").get<std::string>();
      v.width = a.at("width").get<unsigned>();
      v.bits = detail::json_bits(a, step);
      v.category = category_from_name(a.value("category", "resource"));
      attrs.push_back(std::move(v));
    }
    return attrs;
  }

  // Plaintext oracle for what an accepted request's response decrypts to;
  // used to judge whether the adversary's decryption attempt failed.
  BitVec response_oracle(ProtocolKind kind, const Circuit& func, const BitVec& input_bits,
                         const BitVec& data_bits, bool decision) const {
    BitVec all = input_bits;
    all.insert(all.end(), data_bits.begin(), data_bits.end());
    BitVec outputs = eval_plain(func, all);
    if (kind != ProtocolKind::Mcsp) return outputs;
    BitVec framed{decision ? Bit{1} : Bit{0}};
    for (Bit b : outputs) framed.push_back(decision ? b : Bit{0});
    return framed;
  }

  ActionResult run_action(std::size_t index, const nlohmann::json& action) {
    ActionResult res;
    res.index = index;
    try {
      res.action = action.at("action").get<std::string>();
      res.expect = action.value("expect", "");
      res.expect_hex = action.value("expect_hex", "");
    } catch (const nlohmann::json::exception& e) {
      throw ScenarioError(std::string("malformed action: ") + e.what(), index);
    }
    if (res.expect.empty()) throw ScenarioError("action has no 'expect'", index);

    try {
      execute(index, action, res);
    } catch (const ScenarioError&) {
      throw;  // structural problems abort the scenario
    } catch (const Error& e) {
      res.outcome = error_class(e);
    }
    res.pass = res.outcome == res.expect &&
               (res.expect_hex.empty() || res.output_hex == res.expect_hex);
    return res;
  }

  static std::string error_class(const Error& e) {
    if (dynamic_cast<const SignatureRejected*>(&e)) return "SignatureRejected";
    if (dynamic_cast<const ServerSignatureInvalid*>(&e)) return "ServerSignatureInvalid";
    if (dynamic_cast<const NotAdministrator*>(&e)) return "NotAdministrator";
    if (dynamic_cast<const DepthExceeded*>(&e)) return "DepthExceeded";
    if (dynamic_cast<const UnknownFunc*>(&e)) return "UnknownFunc";
    if (dynamic_cast<const UnknownHandle*>(&e)) return "UnknownHandle";
    if (dynamic_cast<const KeyMismatch*>(&e)) return "KeyMismatch";
    if (dynamic_cast<const ShapeError*>(&e)) return "ShapeError";
    return "Error";
  }

  void execute(std::size_t index, const nlohmann::json& action, ActionResult& res) {
    const std::string& kind = res.action;
    const FheBackend& be = backend_for(spec_.backend);

    if (kind == "upload") {
      const ScenarioData& d = data_or_throw(action.at("data").get<std::string>(), index);
      UserAgent& owner = agent_or_throw(d.owner, index);
      handles_[d.label] = upload_data(owner, *server_, *bus_, transcript_, d.bits);
      res.outcome = "stored";

    } else if (kind == "request" || kind == "request_with_old_key") {
      UserAgent& user = agent_or_throw(action.at("principal").get<std::string>(), index);
      ProtocolKind proto = action.contains("protocol")
                               ? protocol_from_name(action.at("protocol").get<std::string>())
                               : spec_.default_protocol;
      BitVec func_id =
          bits_from_hex_width(action.at("func").get<std::string>(), spec_.func_id_width);
      std::string label = action.at("data").get<std::string>();
      std::uint64_t handle = handle_or_throw(label, index);
      BitVec input_bits;
      if (action.contains("input")) input_bits = detail::json_bits(action.at("input"), index);

      UserAgent* requester = &user;
      UserAgent stale;
      if (kind == "request_with_old_key") {
        auto it = old_auth_.find(user.principal_id);
        if (it == old_auth_.end()) {
          throw ScenarioError("'" + user.principal_id + "' has no retired auth key", index);
        }
        stale = user;
        stale.auth = it->second;
        requester = &stale;
      }

      const Circuit& func = func_or_throw(func_id, index);
      const ScenarioData& d = data_or_throw(label, index);
      if (proto == ProtocolKind::Mcsp) {
        McspOutcome mcsp = mcsp_run(*requester, *server_, *bus_, transcript_, func_id, handle,
                                    input_bits, parse_attrs(action, index));
        last_request_ = {response_oracle(proto, func, input_bits, d.bits, mcsp.granted)};
        if (mcsp.granted) {
          res.outcome = "output";
          res.output_hex = bits_to_hex(mcsp.bits);
        } else {
          res.outcome = "denied";
        }
      } else {
        BitVec bits = proto == ProtocolKind::Basic
                          ? basic_run(*requester, *server_, *bus_, transcript_, func_id, handle,
                                      input_bits)
                          : mssp_run(*requester, *server_, *bus_, transcript_, func_id, handle,
                                     input_bits);
        last_request_ = {response_oracle(proto, func, input_bits, d.bits, true)};
        res.outcome = "output";
        res.output_hex = bits_to_hex(bits);
      }

    } else if (kind == "prb_upload") {
      UserAgent& sender = agent_or_throw(action.at("principal").get<std::string>(), index);
      if (!spec_.prb) throw ScenarioError("scenario has no PRB to upload", index);
      // A non-admin sender encrypts and signs the same rule base; the
      // server must still reject it.
      std::optional<PolicyRuleBase> saved = sender.policy;
      sender.policy = spec_.prb;
      try {
        upload_prb(sender, *server_, *bus_, transcript_, /*initial=*/false);
        res.outcome = "installed";
      } catch (...) {
        sender.policy = saved;
        throw;
      }
      sender.policy = saved;

    } else if (kind == "inject_forged_request" || kind == "inject_with_stolen_auth" ||
               kind == "inject_with_stolen_eval") {
      if (!mallory_ || !spec_.adversary.inject_request) {
        throw ScenarioError("adversary cannot inject requests in this scenario", index);
      }
      ProtocolKind proto = action.contains("protocol")
                               ? protocol_from_name(action.at("protocol").get<std::string>())
                               : spec_.default_protocol;
      BitVec func_id =
          bits_from_hex_width(action.at("func").get<std::string>(), spec_.func_id_width);
      std::string label = action.at("data").get<std::string>();
      std::uint64_t handle = handle_or_throw(label, index);
      BitVec input_bits;
      if (action.contains("input")) input_bits = detail::json_bits(action.at("input"), index);

      const AuthKeyPair* signer = &mallory_->own_auth;
      if (kind == "inject_with_stolen_auth") {
        if (!mallory_->stolen_auth) {
          throw ScenarioError("adversary holds no stolen auth key", index);
        }
        signer = &*mallory_->stolen_auth;
      }
      Message forged =
          forge_op_request(*signer, server_->eval_public_key(), proto, func_id, handle,
                           input_bits, parse_attrs(action, index),
                           derive_seed(spec_.adversary_seed, 0x10000 + index));
      InjectOutcome inj = mallory_inject(*bus_, *server_, transcript_, forged);
      res.outcome = judge_injection(proto, func_id, label, input_bits, action, index, inj);

    } else if (kind == "replay_last_request") {
      if (!mallory_ || !spec_.adversary.replay) {
        throw ScenarioError("adversary cannot replay in this scenario", index);
      }
      InjectOutcome inj = mallory_replay(*bus_, *server_, transcript_);
      if (inj.rejected) {
        res.outcome = inj.error;
      } else {
        // The replayed bytes are the last OpRequest; judge against the
        // recorded plaintext of that request.
        if (!last_request_) throw ScenarioError("no request to replay", index);
        res.outcome = judge_capture(last_request_->oracle, inj.response_cts);
      }

    } else if (kind == "read_server_state") {
      LeakageReport report = mallory_read_server(spec_.adversary, *server_);
      if (report.fields.empty()) {
        res.outcome = "no_access";
      } else if (report.contains_class("plaintext_bit") ||
                 report.contains_class("eval_secret_key")) {
        res.outcome = "leaked_secrets";
      } else {
        res.outcome = "ciphertext_only";
      }

    } else if (kind == "rotate_auth_key") {
      UserAgent& user = agent_or_throw(action.at("principal").get<std::string>(), index);
      UserAgent& admin = agent_or_throw(require_admin(index), index);
      old_auth_[user.principal_id] = user.auth;
      rotate_auth_key(user, admin, *server_, *bus_, transcript_,
                      action.at("new_seed").get<std::uint64_t>());
      res.outcome = "rotated";

    } else if (kind == "revoke_user") {
      UserAgent& admin = agent_or_throw(require_admin(index), index);
      revoke_user(admin, *server_, *bus_, transcript_,
                  action.at("principal").get<std::string>());
      res.outcome = "revoked";

    } else if (kind == "reencrypt") {
      UserAgent& admin = agent_or_throw(require_admin(index), index);
      std::string strat = action.at("strategy").get<std::string>();
      ReencryptStrategy strategy;
      if (strat == "oracle_rotation") strategy = ReencryptStrategy::OracleRotation;
      else if (strat == "homomorphic_rotation") strategy = ReencryptStrategy::HomomorphicRotation;
      else throw ScenarioError("unknown re-encryption strategy '" + strat + "'", index);
      SchemeParams params = spec_.params.value_or(be.default_params());
      if (spec_.params) params.max_mult_depth = 0;
      EvalKeyPair fresh = be.keygen(params, action.at("new_eval_seed").get<std::uint64_t>());
      reencrypt_data(admin, *server_, *bus_, transcript_, strategy, fresh);
      for (auto& [id, agent] : agents_) {
        if (agent.eval && id != admin.principal_id) agent.eval = fresh;
      }
      eval_ = fresh;
      res.outcome = "reencrypted";

    } else {
      throw ScenarioError("unknown action '" + kind + "'", index);
    }
  }

  std::string require_admin(std::size_t index) const {
    if (admin_id_.empty()) throw ScenarioError("scenario has no administrator", index);
    return admin_id_;
  }

  // Decides the outcome of an accepted or rejected injection. An accepted
  // request is only a problem if the adversary can actually read the
  // response; "accepted_undecryptable" means her best decryption disagrees
  // with the plaintext oracle.
  std::string judge_injection(ProtocolKind proto, const BitVec& func_id,
                              const std::string& label, const BitVec& input_bits,
                              const nlohmann::json& action, std::size_t index,
                              const InjectOutcome& inj) {
    if (inj.rejected) return inj.error;
    const Circuit& func = func_or_throw(func_id, index);
    const ScenarioData& d = data_or_throw(label, index);
    bool decision = true;  // stolen-identity MCSP requests ride the victim's privileges
    BitVec oracle = response_oracle(proto, func, input_bits, d.bits, decision);
    return judge_capture(oracle, inj.response_cts);
  }

  std::string judge_capture(const BitVec& oracle, const std::vector<Ciphertext>& cts) {
    const EvalSecretKey* best = nullptr;
    if (mallory_->stolen_eval_sk) best = &*mallory_->stolen_eval_sk;
    else if (mallory_own_eval_) best = &mallory_own_eval_->secret_key;
    if (best == nullptr) return "accepted_undecryptable";
    BitVec attempt = adversary_raw_decrypt(*best, cts);
    if (attempt.size() != oracle.size()) return "accepted_undecryptable";
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      if (attempt[i] != oracle[i]) return "accepted_undecryptable";
    }
    return "adversary_decrypted";
  }

  ScenarioSpec spec_;
  Transcript transcript_;
  std::optional<Bus> bus_;
  std::optional<ServerAgent> server_;
  std::map<std::string, UserAgent> agents_;
  std::optional<EvalKeyPair> eval_;
  std::optional<MalloryKeys> mallory_;
  std::optional<EvalKeyPair> mallory_own_eval_;
  std::string admin_id_;
  std::map<std::string, std::uint64_t> handles_;
  std::map<std::string, AuthKeyPair> old_auth_;

  struct LastRequest {
    BitVec oracle;
  };
  std::optional<LastRequest> last_request_;
};

inline ScenarioOutcome run_scenario(ScenarioSpec spec) {
  return ScenarioRunner(std::move(spec)).run();
}

}  // namespace oblivion
