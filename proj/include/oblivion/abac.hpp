#pragma once

// Server-oblivious attribute-based access control.
//
// Policies are OR-of-AND-of-equality rules over subject / resource /
// environment attributes plus an optional set of permitted function ids.
// The access predicate compiles to a boolean circuit whose topology depends
// only on the public shape (schema, func-id width, rule count, func slots),
// never on rule values: the server builds and evaluates it homomorphically
// without learning what the policy says or what it decided.
//
// Canonical rule layout. Every rule is padded to the full schema so that
// value-differing rule bases are indistinguishable beyond shape. Per rule,
// in circuit-input order:
//
//   for each schema attribute: use bit, value bits (attribute width)
//   func_any bit (1 = rule permits every function)
//   for each func slot:        use bit, func-id bits
//
// A predicate on an attribute sets its use bit; unconstrained attributes
// carry use=0 and zero padding, which the circuit neutralizes. The full
// canAccess input vector is: request attribute bits (schema order), then
// requested func-id bits, then the rule layouts above, rule-major.

#include <cstdint>
#include <string>
#include <vector>

#include "oblivion/authsig.hpp"
#include "oblivion/circuit.hpp"
#include "oblivion/errors.hpp"
#include "oblivion/fhe.hpp"

namespace oblivion {

enum class AttrCategory : std::uint8_t { Subject = 0, Resource = 1, Environment = 2 };

inline const char* category_name(AttrCategory c) {
  switch (c) {
    case AttrCategory::Subject: return "subject";
    case AttrCategory::Resource: return "resource";
    default: return "environment";
  }
}

inline AttrCategory category_from_name(const std::string& name) {
  if (name == "subject") return AttrCategory::Subject;
  if (name == "resource") return AttrCategory::Resource;
  if (name == "environment") return AttrCategory::Environment;
  throw InvalidParams("unknown attribute category '" + name + "'");
}

struct AttributeValue {
  std::string name;
  unsigned width = 0;
  BitVec bits;
  AttrCategory category = AttrCategory::Subject;

  bool operator==(const AttributeValue&) const = default;

  void validate() const {
    if (width == 0) throw InvalidParams("attribute width must be positive");
    if (bits.size() != width) {
      throw InvalidParams("attribute '" + name + "' has " + std::to_string(bits.size()) +
                          " bits, declared width " + std::to_string(width));
    }
  }
};

struct EncryptedAttribute {
  std::string name;
  std::vector<Ciphertext> ciphertexts;
  AttrCategory category = AttrCategory::Subject;
};

struct SchemaEntry {
  std::string name;
  unsigned width = 0;
  AttrCategory category = AttrCategory::Subject;

  bool operator==(const SchemaEntry&) const = default;
};

struct Predicate {
  std::string attr_name;
  BitVec required_bits;

  bool operator==(const Predicate&) const = default;
};

struct PolicyRule {
  std::vector<Predicate> predicates;
  std::vector<BitVec> permitted_funcs;  // empty = any func

  bool operator==(const PolicyRule&) const = default;
};

// Public circuit-shaping metadata; everything the server may know.
struct PrbShape {
  std::vector<SchemaEntry> schema;
  unsigned func_id_width = 0;
  unsigned rule_count = 0;
  unsigned func_slots = 0;

  bool operator==(const PrbShape&) const = default;
};

inline constexpr unsigned kDefaultFuncSlots = 2;

struct PolicyRuleBase {
  std::vector<SchemaEntry> schema;
  unsigned func_id_width = 0;
  std::vector<PolicyRule> rules;
  unsigned func_slots = kDefaultFuncSlots;

  bool operator==(const PolicyRuleBase&) const = default;

  const SchemaEntry* find_schema(const std::string& name) const {
    for (const SchemaEntry& e : schema) {
      if (e.name == name) return &e;
    }
    return nullptr;
  }

  PrbShape shape() const {
    return PrbShape{schema, func_id_width, static_cast<unsigned>(rules.size()), func_slots};
  }

  void validate() const {
    if (func_id_width == 0) throw ShapeError("func_id_width must be positive");
    for (std::size_t i = 0; i < schema.size(); ++i) {
      if (schema[i].width == 0) {
        throw ShapeError("schema attribute '" + schema[i].name + "' has zero width");
      }
      for (std::size_t j = i + 1; j < schema.size(); ++j) {
        if (schema[i].name == schema[j].name) {
          throw ShapeError("duplicate schema attribute '" + schema[i].name + "'");
        }
      }
    }
    for (std::size_t r = 0; r < rules.size(); ++r) {
      const PolicyRule& rule = rules[r];
      if (rule.predicates.empty() && rule.permitted_funcs.empty()) {
        throw ShapeError("rule " + std::to_string(r) +
                         " constrains neither attributes nor functions");
      }
      for (std::size_t i = 0; i < rule.predicates.size(); ++i) {
        const Predicate& p = rule.predicates[i];
        const SchemaEntry* e = find_schema(p.attr_name);
        if (e == nullptr) {
          throw ShapeError("rule " + std::to_string(r) + " references unknown attribute '" +
                           p.attr_name + "'");
        }
        if (p.required_bits.size() != e->width) {
          throw ShapeError("rule " + std::to_string(r) + " predicate on '" + p.attr_name +
                           "' has wrong width");
        }
        for (std::size_t j = i + 1; j < rule.predicates.size(); ++j) {
          if (rule.predicates[j].attr_name == p.attr_name) {
            throw ShapeError("rule " + std::to_string(r) + " repeats predicate on '" +
                             p.attr_name + "'");
          }
        }
      }
      if (rule.permitted_funcs.size() > func_slots) {
        throw ShapeError("rule " + std::to_string(r) + " permits " +
                         std::to_string(rule.permitted_funcs.size()) + " funcs, only " +
                         std::to_string(func_slots) + " slots");
      }
      for (const BitVec& f : rule.permitted_funcs) {
        if (f.size() != func_id_width) {
          throw ShapeError("rule " + std::to_string(r) + " func id has wrong width");
        }
      }
    }
  }
};

struct EncryptedPRB {
  std::vector<SchemaEntry> schema;  // public, in clear
  unsigned func_id_width = 0;
  unsigned func_slots = 0;
  std::vector<std::vector<Ciphertext>> rule_bits;  // canonical layout per rule
  Fingerprint key_fingerprint;

  PrbShape shape() const {
    return PrbShape{schema, func_id_width, static_cast<unsigned>(rule_bits.size()), func_slots};
  }
};

// Width of one rule's canonical layout.
inline unsigned rule_layout_width(const PrbShape& s) {
  unsigned w = 0;
  for (const SchemaEntry& e : s.schema) w += 1 + e.width;
  return w + 1 + s.func_slots * (1 + s.func_id_width);
}

inline unsigned request_attr_width(const PrbShape& s) {
  unsigned w = 0;
  for (const SchemaEntry& e : s.schema) w += e.width;
  return w;
}

inline void validate_shape(const PrbShape& s) {
  if (s.func_id_width == 0) throw ShapeError("func_id_width must be positive");
  for (std::size_t i = 0; i < s.schema.size(); ++i) {
    if (s.schema[i].width == 0) {
      throw ShapeError("schema attribute '" + s.schema[i].name + "' has zero width");
    }
    for (std::size_t j = i + 1; j < s.schema.size(); ++j) {
      if (s.schema[i].name == s.schema[j].name) {
        throw ShapeError("duplicate schema attribute '" + s.schema[i].name + "'");
      }
    }
  }
}

// Canonical plaintext bits for one rule; encrypt_prb encrypts exactly this.
inline BitVec rule_layout_bits(const PolicyRuleBase& prb, std::size_t rule_idx) {
  const PolicyRule& rule = prb.rules.at(rule_idx);
  BitVec out;
  out.reserve(rule_layout_width(prb.shape()));
  for (const SchemaEntry& e : prb.schema) {
    const Predicate* found = nullptr;
    for (const Predicate& p : rule.predicates) {
      if (p.attr_name == e.name) {
        found = &p;
        break;
      }
    }
    out.push_back(found != nullptr ? 1 : 0);
    for (unsigned k = 0; k < e.width; ++k) {
      out.push_back(found != nullptr ? found->required_bits[k] : 0);
    }
  }
  out.push_back(rule.permitted_funcs.empty() ? 1 : 0);  // func_any
  for (unsigned s = 0; s < prb.func_slots; ++s) {
    bool used = s < rule.permitted_funcs.size();
    out.push_back(used ? 1 : 0);
    for (unsigned k = 0; k < prb.func_id_width; ++k) {
      out.push_back(used ? rule.permitted_funcs[s][k] : 0);
    }
  }
  return out;
}

// ---- Subject identification ----

// Eq. (3b)-style subject attribute: a width-bit digest of the serialized
// auth public key stands in for the key itself, whose size exceeds any
// practical attribute width. Collisions are possible at small widths;
// deployments pick the width for their population size.
inline AttributeValue fingerprint_subject(const AuthPublicKey& pk, unsigned width,
                                          std::string attr_name = "subject_fp") {
  if (width == 0) throw InvalidParams("fingerprint width must be positive");
  if (width > 256) {
    throw WidthTooLarge("fingerprint width " + std::to_string(width) + " exceeds digest width");
  }
  Digest256 d = digest256(serialize_auth_public(pk));
  AttributeValue out;
  out.name = std::move(attr_name);
  out.width = width;
  out.category = AttrCategory::Subject;
  out.bits.reserve(width);
  for (unsigned k = 0; k < width; ++k) {
    out.bits.push_back(static_cast<Bit>((d[k / 8] >> (k % 8)) & 1));
  }
  return out;
}

// ---- canAccess compilation ----

// The circuit reads (request attrs ++ func id ++ rule layouts) and emits a
// single decision bit: OR over rules of (all used predicates hold AND the
// requested func is permitted). Only the shape flows in, so two rule bases
// with equal shape compile to bit-identical circuits.
inline Circuit compile_canaccess(const PrbShape& shape) {
  validate_shape(shape);
  const unsigned attr_width = request_attr_width(shape);
  const unsigned rule_width = rule_layout_width(shape);
  const unsigned total = attr_width + shape.func_id_width + shape.rule_count * rule_width;
  CircuitBuilder b(total);

  std::vector<std::uint32_t> attr_base(shape.schema.size());
  {
    std::uint32_t off = 0;
    for (std::size_t j = 0; j < shape.schema.size(); ++j) {
      attr_base[j] = off;
      off += shape.schema[j].width;
    }
  }
  const std::uint32_t func_base = attr_width;

  std::vector<std::uint32_t> rule_ok;
  rule_ok.reserve(shape.rule_count);
  for (unsigned r = 0; r < shape.rule_count; ++r) {
    std::uint32_t cursor = attr_width + shape.func_id_width + r * rule_width;
    std::vector<std::uint32_t> clauses;
    clauses.reserve(shape.schema.size() + 1);
    for (std::size_t j = 0; j < shape.schema.size(); ++j) {
      const unsigned w = shape.schema[j].width;
      std::uint32_t use = cursor++;
      std::vector<std::uint32_t> eq_in;
      eq_in.reserve(2 * w);
      for (unsigned k = 0; k < w; ++k) eq_in.push_back(attr_base[j] + k);
      for (unsigned k = 0; k < w; ++k) eq_in.push_back(cursor + k);
      cursor += w;
      std::uint32_t match = b.embed(build_equality(w), eq_in)[0];
      // Unused predicate slots must not constrain: ok = NOT(use AND NOT match).
      clauses.push_back(b.not_(b.and_(use, b.not_(match))));
    }
    std::uint32_t func_any = cursor++;
    std::vector<std::uint32_t> func_terms{func_any};
    for (unsigned s = 0; s < shape.func_slots; ++s) {
      std::uint32_t use = cursor++;
      std::vector<std::uint32_t> eq_in;
      eq_in.reserve(2 * shape.func_id_width);
      for (unsigned k = 0; k < shape.func_id_width; ++k) eq_in.push_back(func_base + k);
      for (unsigned k = 0; k < shape.func_id_width; ++k) eq_in.push_back(cursor + k);
      cursor += shape.func_id_width;
      std::uint32_t match = b.embed(build_equality(shape.func_id_width), eq_in)[0];
      func_terms.push_back(b.and_(use, match));
    }
    clauses.push_back(b.or_tree(func_terms));
    rule_ok.push_back(b.and_tree(clauses));
  }
  return b.build({b.or_tree(rule_ok)});
}

// ---- Encryption ----

inline std::vector<EncryptedAttribute> encrypt_attributes(
    const EvalPublicKey& pk, const std::vector<AttributeValue>& attrs, std::uint64_t seed) {
  const FheBackend& be = backend_for(pk.backend);
  std::vector<EncryptedAttribute> out;
  out.reserve(attrs.size());
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    attrs[i].validate();
    EncryptedAttribute ea;
    ea.name = attrs[i].name;
    ea.category = attrs[i].category;
    ea.ciphertexts = be.encrypt_bits(pk, attrs[i].bits, derive_seed(seed, i));
    out.push_back(std::move(ea));
  }
  return out;
}

inline EncryptedPRB encrypt_prb(const EvalPublicKey& pk, const PolicyRuleBase& prb,
                                std::uint64_t seed) {
  prb.validate();
  const FheBackend& be = backend_for(pk.backend);
  EncryptedPRB out;
  out.schema = prb.schema;
  out.func_id_width = prb.func_id_width;
  out.func_slots = prb.func_slots;
  out.key_fingerprint = pk.fingerprint;
  out.rule_bits.reserve(prb.rules.size());
  for (std::size_t r = 0; r < prb.rules.size(); ++r) {
    out.rule_bits.push_back(be.encrypt_bits(pk, rule_layout_bits(prb, r), derive_seed(seed, r)));
  }
  return out;
}

// ---- Oblivious verification and enforcement ----

inline Ciphertext verify_access(const EvalPublicKey& pk, const Circuit& canaccess,
                                const std::vector<EncryptedAttribute>& enc_attrs,
                                const std::vector<Ciphertext>& enc_func_id,
                                const EncryptedPRB& enc_prb) {
  const PrbShape shape = enc_prb.shape();
  if (enc_attrs.size() != shape.schema.size()) {
    throw ShapeError("request carries " + std::to_string(enc_attrs.size()) +
                     " attributes, schema has " + std::to_string(shape.schema.size()));
  }
  std::vector<Ciphertext> inputs;
  inputs.reserve(canaccess.num_inputs);
  for (std::size_t j = 0; j < shape.schema.size(); ++j) {
    if (enc_attrs[j].name != shape.schema[j].name) {
      throw ShapeError("attribute " + std::to_string(j) + " is '" + enc_attrs[j].name +
                       "', schema expects '" + shape.schema[j].name + "'");
    }
    if (enc_attrs[j].ciphertexts.size() != shape.schema[j].width) {
      throw ShapeError("attribute '" + enc_attrs[j].name + "' has wrong width");
    }
    inputs.insert(inputs.end(), enc_attrs[j].ciphertexts.begin(), enc_attrs[j].ciphertexts.end());
  }
  if (enc_func_id.size() != shape.func_id_width) {
    throw ShapeError("func id has wrong width");
  }
  inputs.insert(inputs.end(), enc_func_id.begin(), enc_func_id.end());
  const unsigned rule_width = rule_layout_width(shape);
  for (const std::vector<Ciphertext>& rb : enc_prb.rule_bits) {
    if (rb.size() != rule_width) throw ShapeError("encrypted rule has wrong layout width");
    inputs.insert(inputs.end(), rb.begin(), rb.end());
  }
  if (inputs.size() != canaccess.num_inputs) {
    throw ShapeError("canAccess circuit arity does not match the rule base shape");
  }
  return backend_for(pk.backend).evaluate(pk, canaccess, inputs)[0];
}

// Enforcement the server can apply to a decision it cannot read: every
// output bit is ANDed with the decision, so a denial decrypts to all
// zeros. Callers prepend the decision bit itself as a validity marker to
// distinguish a denial from a genuine all-zero result.
inline std::vector<Ciphertext> gate_output(const EvalPublicKey& pk, const Ciphertext& decision,
                                           const std::vector<Ciphertext>& outputs) {
  const FheBackend& be = backend_for(pk.backend);
  if (!(decision.key_fingerprint == pk.fingerprint)) {
    throw KeyMismatch("decision ciphertext under a different key");
  }
  std::vector<Ciphertext> gated;
  gated.reserve(outputs.size());
  for (const Ciphertext& out : outputs) gated.push_back(be.eval_and(decision, out));
  return gated;
}

// ---- Bit/hex helpers for policy values (little-endian bit order) ----

inline std::string bits_to_hex(const BitVec& bits) {
  BigInt v = 0;
  for (std::size_t i = bits.size(); i-- > 0;) v = (v << 1) | bits[i];
  return bigint_to_hex(v);
}

inline BitVec bits_from_hex_width(const std::string& hex, unsigned width) {
  BigInt v = bigint_from_hex(hex);
  BitVec out(width, 0);
  for (unsigned i = 0; i < width; ++i) {
    out[i] = static_cast<Bit>(v & 1);
    v >>= 1;
  }
  if (v != 0) {
    throw InvalidParams("value 0x" + hex + " does not fit in " + std::to_string(width) +
                        " bits");
  }
  return out;
}

// ---- PRB plaintext file format ----
//
//   OBLIVION-PRB v1
//   func_id_width: <n>
//   func_slots: <n>
//   schema:
//   <name> <width> <subject|resource|environment>
//   rule:
//   predicate <name> = <hex>
//   permit func <hex>

inline std::string serialize_prb(const PolicyRuleBase& prb) {
  std::string out = "OBLIVION-PRB v1\n";
  out += "func_id_width: " + std::to_string(prb.func_id_width) + "\n";
  out += "func_slots: " + std::to_string(prb.func_slots) + "\n";
  out += "schema:\n";
  for (const SchemaEntry& e : prb.schema) {
    out += "  " + e.name + " " + std::to_string(e.width) + " " + category_name(e.category) + "\n";
  }
  for (const PolicyRule& rule : prb.rules) {
    out += "rule:\n";
    for (const Predicate& p : rule.predicates) {
      out += "  predicate " + p.attr_name + " = " + bits_to_hex(p.required_bits) + "\n";
    }
    for (const BitVec& f : rule.permitted_funcs) {
      out += "  permit func " + bits_to_hex(f) + "\n";
    }
  }
  return out;
}

inline PolicyRuleBase parse_prb(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&](std::string& out) {
    while (std::getline(in, line)) {
      ++lineno;
      std::size_t a = line.find_first_not_of(" \t\r");
      if (a == std::string::npos) continue;  // blank
      std::size_t z = line.find_last_not_of(" \t\r");
      out = line.substr(a, z - a + 1);
      if (out[0] == '#') continue;  // comment
      return true;
    }
    return false;
  };

  std::string cur;
  if (!next_line(cur) || cur != "OBLIVION-PRB v1") throw ParseError("missing PRB header", lineno);

  PolicyRuleBase prb;
  prb.func_slots = kDefaultFuncSlots;
  enum class Section { Top, Schema, Rule } section = Section::Top;
  bool have_width = false;
  while (next_line(cur)) {
    if (cur == "schema:") {
      section = Section::Schema;
      continue;
    }
    if (cur == "rule:") {
      section = Section::Rule;
      prb.rules.emplace_back();
      continue;
    }
    std::istringstream ls(cur);
    if (section == Section::Top) {
      std::string key;
      ls >> key;
      unsigned value = 0;
      if (!(ls >> value)) throw ParseError("expected '<key>: <n>'", lineno);
      if (key == "func_id_width:") {
        prb.func_id_width = value;
        have_width = true;
      } else if (key == "func_slots:") {
        prb.func_slots = value;
      } else {
        throw ParseError("unknown PRB setting '" + key + "'", lineno);
      }
    } else if (section == Section::Schema) {
      SchemaEntry e;
      std::string cat;
      if (!(ls >> e.name >> e.width >> cat)) {
        throw ParseError("expected '<name> <width> <category>'", lineno);
      }
      try {
        e.category = category_from_name(cat);
      } catch (const InvalidParams& ex) {
        throw ParseError(ex.what(), lineno);
      }
      prb.schema.push_back(std::move(e));
    } else {
      std::string kind;
      ls >> kind;
      if (kind == "predicate") {
        Predicate p;
        std::string eq, hex;
        if (!(ls >> p.attr_name >> eq >> hex) || eq != "=") {
          throw ParseError("expected 'predicate <name> = <hex>'", lineno);
        }
        const SchemaEntry* e = prb.find_schema(p.attr_name);
        if (e == nullptr) throw ParseError("unknown attribute '" + p.attr_name + "'", lineno);
        try {
          p.required_bits = bits_from_hex_width(hex, e->width);
        } catch (const std::exception& ex) {
          throw ParseError(ex.what(), lineno);
        }
        prb.rules.back().predicates.push_back(std::move(p));
      } else if (kind == "permit") {
        std::string func_kw, hex;
        if (!(ls >> func_kw >> hex) || func_kw != "func") {
          throw ParseError("expected 'permit func <hex>'", lineno);
        }
        try {
          prb.rules.back().permitted_funcs.push_back(
              bits_from_hex_width(hex, prb.func_id_width));
        } catch (const std::exception& ex) {
          throw ParseError(ex.what(), lineno);
        }
      } else {
        throw ParseError("unknown rule line '" + kind + "'", lineno);
      }
    }
  }
  if (!have_width) throw ParseError("PRB file missing func_id_width", lineno);
  prb.validate();
  return prb;
}

// ---- Encrypted PRB serialization ----
//
// Schema header in clear (it is public metadata), then the rule layouts as
// ciphertext lines in canonical order.

inline std::string serialize_encrypted_prb(const EncryptedPRB& prb) {
  std::string out = "OBLIVION-ENCPRB v1\n";
  out += "func_id_width: " + std::to_string(prb.func_id_width) + "\n";
  out += "func_slots: " + std::to_string(prb.func_slots) + "\n";
  out += "rules: " + std::to_string(prb.rule_bits.size()) + "\n";
  out += "schema:\n";
  for (const SchemaEntry& e : prb.schema) {
    out += "  " + e.name + " " + std::to_string(e.width) + " " + category_name(e.category) + "\n";
  }
  out += "ciphertexts:\n";
  for (const std::vector<Ciphertext>& rb : prb.rule_bits) {
    out += serialize_ciphertexts(rb);
  }
  return out;
}

inline EncryptedPRB parse_encrypted_prb(const std::string& text, BackendId backend,
                                        const EvalPublicKey* key_ctx = nullptr) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) { throw ParseError(what, lineno); };

  EncryptedPRB prb;
  unsigned rule_count = 0;
  if (!std::getline(in, line) || line != "OBLIVION-ENCPRB v1") fail("missing header");
  ++lineno;
  auto read_kv = [&](const std::string& key) {
    if (!std::getline(in, line)) fail("truncated header");
    ++lineno;
    std::istringstream ls(line);
    std::string k;
    unsigned v = 0;
    if (!(ls >> k >> v) || k != key + ":") fail("expected '" + key + ": <n>'");
    return v;
  };
  prb.func_id_width = read_kv("func_id_width");
  prb.func_slots = read_kv("func_slots");
  rule_count = read_kv("rules");
  if (!std::getline(in, line) || line != "schema:") fail("expected 'schema:'");
  ++lineno;
  std::string ct_text;
  bool in_cts = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!in_cts) {
      if (line == "ciphertexts:") {
        in_cts = true;
        continue;
      }
      std::istringstream ls(line);
      SchemaEntry e;
      std::string cat;
      if (!(ls >> e.name >> e.width >> cat)) fail("bad schema line");
      try {
        e.category = category_from_name(cat);
      } catch (const InvalidParams& ex) {
        fail(ex.what());
      }
      prb.schema.push_back(std::move(e));
    } else {
      ct_text += line + "\n";
    }
  }
  if (!in_cts) fail("missing 'ciphertexts:' section");

  std::vector<Ciphertext> flat = parse_ciphertexts(ct_text, backend, key_ctx);
  const unsigned rule_width = rule_layout_width(prb.shape());
  if (flat.size() != static_cast<std::size_t>(rule_count) * rule_width) {
    fail("expected " + std::to_string(rule_count * rule_width) + " ciphertexts, got " +
         std::to_string(flat.size()));
  }
  prb.rule_bits.reserve(rule_count);
  for (unsigned r = 0; r < rule_count; ++r) {
    prb.rule_bits.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(r) * rule_width,
                               flat.begin() + static_cast<std::ptrdiff_t>(r + 1) * rule_width);
  }
  if (!flat.empty()) prb.key_fingerprint = flat[0].key_fingerprint;
  if (key_ctx != nullptr) prb.key_fingerprint = key_ctx->fingerprint;
  return prb;
}

}  // namespace oblivion
