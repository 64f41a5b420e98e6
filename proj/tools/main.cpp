// Command-line front end: key generation, bit encryption/decryption,
// circuit and policy tooling, and the scenario runner. Every command is a
// thin wrapper over the library; all randomness comes from --seed, so
// output files are byte-identical across repeated runs.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oblivion/io.hpp"
#include "oblivion/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitCrypto = 3;
constexpr int kExitProtocol = 4;
constexpr int kExitScenario = 5;

struct Options {
  std::string backend = "clear";
  std::uint64_t seed = 1;
  std::string params;  // "secret_bits,noise_bits,pk_elements"
  std::string out;
  bool quiet = false;
};

oblivion::SchemeParams effective_params(const oblivion::FheBackend& be, const Options& opt) {
  if (opt.params.empty()) return be.default_params();
  oblivion::SchemeParams p{};
  char c1 = 0, c2 = 0;
  std::istringstream in(opt.params);
  if (!(in >> p.secret_bits >> c1 >> p.noise_bits >> c2 >> p.pk_elements) || c1 != ',' ||
      c2 != ',' || !(in >> std::ws).eof()) {
    throw CLI::ValidationError("--params", "expected <secret_bits>,<noise_bits>,<pk_elements>");
  }
  p.max_mult_depth = 0;  // derived by keygen
  return p;
}

const oblivion::FheBackend& backend_of(const Options& opt) {
  return oblivion::backend_for(oblivion::backend_from_name(opt.backend));
}

void require_out(const Options& opt) {
  if (opt.out.empty()) throw CLI::RequiredError("--out");
}

int cmd_keygen_auth(const Options& opt, const std::string& principal) {
  require_out(opt);
  oblivion::AuthKeyPair kp = oblivion::auth_keygen(opt.seed, principal);
  oblivion::write_file(opt.out, oblivion::serialize_auth_secret(kp));
  oblivion::write_file(opt.out + ".pub", oblivion::serialize_auth_public(kp.public_key));
  if (!opt.quiet) {
    std::cout << "auth key for '" << principal << "': " << opt.out << " (+ .pub)\n";
  }
  return kExitOk;
}

int cmd_keygen_eval(const Options& opt) {
  require_out(opt);
  const oblivion::FheBackend& be = backend_of(opt);
  oblivion::EvalKeyPair kp = be.keygen(effective_params(be, opt), opt.seed);
  oblivion::write_file(opt.out, oblivion::serialize_eval_secret(kp));
  oblivion::write_file(opt.out + ".pub", oblivion::serialize_eval_public(kp.public_key));
  if (!opt.quiet) {
    std::cout << "eval key (" << oblivion::backend_name(be.id())
              << ", depth " << kp.public_key.params.max_mult_depth << "): " << opt.out
              << " (+ .pub)\n";
  }
  return kExitOk;
}

int cmd_encrypt(const Options& opt, const std::string& key_path, const std::string& hex,
                unsigned width) {
  require_out(opt);
  const oblivion::FheBackend& be = backend_of(opt);
  oblivion::EvalPublicKey pk =
      oblivion::parse_eval_public(oblivion::read_file(key_path), be.id());
  oblivion::BitVec bits = oblivion::bits_from_hex_width(hex, width);
  std::vector<oblivion::Ciphertext> cts = be.encrypt_bits(pk, bits, opt.seed);
  oblivion::write_file(opt.out, oblivion::serialize_ciphertexts(cts));
  if (!opt.quiet) std::cout << width << " bit(s) encrypted to " << opt.out << "\n";
  return kExitOk;
}

int cmd_decrypt(const Options& opt, const std::string& key_path, const std::string& in_path) {
  const oblivion::FheBackend& be = backend_of(opt);
  oblivion::EvalKeyPair kp =
      oblivion::parse_eval_secret(oblivion::read_file(key_path), be.id());
  std::vector<oblivion::Ciphertext> cts = oblivion::parse_ciphertexts(
      oblivion::read_file(in_path), be.id(), &kp.public_key);
  oblivion::BitVec bits = be.decrypt_bits(kp.secret_key, cts);
  std::string hex = oblivion::bits_to_hex(bits);
  std::cout << hex << " width=" << bits.size() << "\n";
  if (!opt.out.empty()) oblivion::write_file(opt.out, hex + "\n");
  return kExitOk;
}

int cmd_circuit_check(const Options& opt, const std::string& in_path) {
  oblivion::Circuit c = oblivion::parse_circuit(oblivion::read_file(in_path));
  oblivion::validate_topology(c);
  if (!opt.quiet) {
    std::cout << "inputs=" << c.num_inputs << " outputs=" << c.outputs.size()
              << " gates=" << c.gates.size() << " depth=" << oblivion::mult_depth(c) << "\n";
  }
  return kExitOk;
}

int cmd_policy_compile(const Options& opt, const std::string& in_path) {
  require_out(opt);
  oblivion::PolicyRuleBase prb = oblivion::parse_prb(oblivion::read_file(in_path));
  prb.validate();
  oblivion::Circuit c = oblivion::compile_canaccess(prb.shape());
  oblivion::write_file(opt.out, oblivion::serialize(c));
  if (!opt.quiet) {
    std::cout << "rules=" << prb.rules.size() << " inputs=" << c.num_inputs
              << " gates=" << c.gates.size() << " depth=" << oblivion::mult_depth(c) << "\n";
  }
  return kExitOk;
}

int cmd_policy_encrypt(const Options& opt, const std::string& in_path,
                       const std::string& key_path) {
  require_out(opt);
  const oblivion::FheBackend& be = backend_of(opt);
  oblivion::EvalPublicKey pk =
      oblivion::parse_eval_public(oblivion::read_file(key_path), be.id());
  oblivion::PolicyRuleBase prb = oblivion::parse_prb(oblivion::read_file(in_path));
  prb.validate();
  oblivion::EncryptedPRB enc = oblivion::encrypt_prb(pk, prb, opt.seed);
  oblivion::write_file(opt.out, oblivion::serialize_encrypted_prb(enc));
  if (!opt.quiet) {
    std::cout << prb.rules.size() << " rule(s) encrypted to " << opt.out << "\n";
  }
  return kExitOk;
}

int cmd_run(const Options& opt, const std::string& scenario_path, bool backend_override) {
  oblivion::ScenarioSpec spec = oblivion::load_scenario(scenario_path);
  if (backend_override) spec.backend = oblivion::backend_from_name(opt.backend);

  oblivion::ScenarioOutcome outcome = oblivion::run_scenario(std::move(spec));

  std::string transcript_path = opt.out;
  if (transcript_path.empty()) {
    transcript_path = std::filesystem::path(scenario_path)
                          .replace_extension(".transcript.jsonl")
                          .string();
  }
  oblivion::write_file(transcript_path, outcome.transcript.to_jsonl());

  if (!opt.quiet) {
    for (const oblivion::ActionResult& r : outcome.results) std::cout << r.summary() << "\n";
  }
  std::cout << "scenario " << outcome.name << ": " << (outcome.all_passed ? "PASS" : "FAIL")
            << " (" << outcome.results.size() << " step(s), transcript " << transcript_path
            << ")\n";
  return outcome.all_passed ? kExitOk : kExitProtocol;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-user computational-privacy toolkit"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--backend", opt.backend, "ciphertext backend")
      ->check(CLI::IsMember({"clear", "toy"}))
      ->capture_default_str();
  app.add_option("--seed", opt.seed, "deterministic randomness seed")->capture_default_str();
  app.add_option("--params", opt.params, "secret_bits,noise_bits,pk_elements");
  app.add_option("--out", opt.out, "output path");
  app.add_flag("--quiet", opt.quiet, "suppress informational output");
  app.fallthrough();

  // keygen auth|eval
  CLI::App* keygen = app.add_subcommand("keygen", "generate a key pair");
  keygen->require_subcommand(1);
  std::string principal;
  CLI::App* kg_auth = keygen->add_subcommand("auth", "signing key pair for a principal");
  kg_auth->add_option("--principal", principal, "principal identifier")->required();
  CLI::App* kg_eval = keygen->add_subcommand("eval", "homomorphic evaluation key pair");

  // encrypt / decrypt
  std::string key_path, hex, in_path;
  unsigned width = 0;
  CLI::App* encrypt = app.add_subcommand("encrypt", "encrypt bits under an eval public key");
  encrypt->add_option("--key", key_path, "eval public key file")->required();
  encrypt->add_option("--hex", hex, "plaintext bits as hex")->required();
  encrypt->add_option("--width", width, "number of bits")->required();
  CLI::App* decrypt = app.add_subcommand("decrypt", "decrypt a ciphertext file");
  decrypt->add_option("--key", key_path, "eval secret key file")->required();
  decrypt->add_option("--in", in_path, "ciphertext file")->required();

  // circuit check
  CLI::App* circuit = app.add_subcommand("circuit", "circuit tooling");
  circuit->require_subcommand(1);
  CLI::App* ck = circuit->add_subcommand("check", "validate a netlist and print its shape");
  ck->add_option("--in", in_path, "netlist file")->required();

  // policy compile|encrypt
  CLI::App* policy = app.add_subcommand("policy", "policy rule base tooling");
  policy->require_subcommand(1);
  CLI::App* pc = policy->add_subcommand("compile", "compile the access-decision circuit");
  pc->add_option("--in", in_path, "policy rule base file")->required();
  CLI::App* pe = policy->add_subcommand("encrypt", "encrypt a policy rule base");
  pe->add_option("--in", in_path, "policy rule base file")->required();
  pe->add_option("--key", key_path, "eval public key file")->required();

  // run
  std::string scenario_path;
  CLI::App* run = app.add_subcommand("run", "execute a scenario script");
  run->add_option("scenario", scenario_path, "scenario JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (kg_auth->parsed()) return cmd_keygen_auth(opt, principal);
    if (kg_eval->parsed()) return cmd_keygen_eval(opt);
    if (encrypt->parsed()) return cmd_encrypt(opt, key_path, hex, width);
    if (decrypt->parsed()) return cmd_decrypt(opt, key_path, in_path);
    if (ck->parsed()) return cmd_circuit_check(opt, in_path);
    if (pc->parsed()) return cmd_policy_compile(opt, in_path);
    if (pe->parsed()) return cmd_policy_encrypt(opt, in_path, key_path);
    if (run->parsed()) return cmd_run(opt, scenario_path, app.count("--backend") > 0);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const oblivion::ScenarioError& e) {
    std::cerr << "scenario error";
    if (e.step != SIZE_MAX) std::cerr << " at step " << e.step;
    std::cerr << ": " << e.what() << "\n";
    return kExitScenario;
  } catch (const oblivion::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return run->parsed() ? kExitScenario : kExitCrypto;
  }
  return kExitUsage;
}
