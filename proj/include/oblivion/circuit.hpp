#pragma once

// Boolean circuits over the gate basis {XOR, AND, NOT, CONST0, CONST1}.
// Circuits are the universal representation of user functions and of the
// compiled access-control predicate. Wires are numbered so that wires
// 0..num_inputs-1 are the inputs and gate k defines wire num_inputs+k;
// gates may only reference lower-numbered wires, so a gate list is
// topologically ordered by construction.
//
// Multi-bit integers are little-endian: bit 0 of an operand is its LSB.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "oblivion/bits.hpp"
#include "oblivion/errors.hpp"

namespace oblivion {

enum class GateKind : std::uint8_t { Xor, And, Not, Const0, Const1 };

inline unsigned gate_arity(GateKind k) {
  switch (k) {
    case GateKind::Xor:
    case GateKind::And:
      return 2;
    case GateKind::Not:
      return 1;
    default:
      return 0;
  }
}

inline const char* gate_name(GateKind k) {
  switch (k) {
    case GateKind::Xor: return "XOR";
    case GateKind::And: return "AND";
    case GateKind::Not: return "NOT";
    case GateKind::Const0: return "CONST0";
    case GateKind::Const1: return "CONST1";
  }
  return "?";
}

struct Gate {
  GateKind kind;
  std::uint32_t a = 0;  // unused for consts
  std::uint32_t b = 0;  // unused for NOT and consts

  bool operator==(const Gate&) const = default;
};

struct Circuit {
  std::uint32_t num_inputs = 0;
  std::vector<Gate> gates;
  std::vector<std::uint32_t> outputs;

  bool operator==(const Circuit&) const = default;

  std::uint32_t num_wires() const {
    return num_inputs + static_cast<std::uint32_t>(gates.size());
  }
};

// Gate-by-gate plaintext evaluation; the oracle everything homomorphic is
// checked against.
inline BitVec eval_plain(const Circuit& c, const BitVec& inputs) {
  if (inputs.size() != c.num_inputs) {
    throw ArityMismatch("circuit expects " + std::to_string(c.num_inputs) +
                        " inputs, got " + std::to_string(inputs.size()));
  }
  std::vector<Bit> wires(c.num_wires());
  std::copy(inputs.begin(), inputs.end(), wires.begin());
  std::size_t w = c.num_inputs;
  for (const Gate& g : c.gates) {
    switch (g.kind) {
      case GateKind::Xor: wires[w] = wires[g.a] ^ wires[g.b]; break;
      case GateKind::And: wires[w] = wires[g.a] & wires[g.b]; break;
      case GateKind::Not: wires[w] = wires[g.a] ^ 1u; break;
      case GateKind::Const0: wires[w] = 0; break;
      case GateKind::Const1: wires[w] = 1; break;
    }
    ++w;
  }
  BitVec out(c.outputs.size());
  for (std::size_t i = 0; i < c.outputs.size(); ++i) out[i] = wires[c.outputs[i]];
  return out;
}

// Maximum number of AND gates on any input-to-output path.
inline unsigned mult_depth(const Circuit& c) {
  std::vector<unsigned> depth(c.num_wires(), 0);
  std::size_t w = c.num_inputs;
  for (const Gate& g : c.gates) {
    switch (g.kind) {
      case GateKind::Xor: depth[w] = std::max(depth[g.a], depth[g.b]); break;
      case GateKind::And: depth[w] = std::max(depth[g.a], depth[g.b]) + 1; break;
      case GateKind::Not: depth[w] = depth[g.a]; break;
      default: depth[w] = 0; break;
    }
    ++w;
  }
  unsigned d = 0;
  for (std::uint32_t o : c.outputs) d = std::max(d, depth[o]);
  return d;
}

// Validates wire references and output indices; parse() relies on this.
inline void validate_topology(const Circuit& c) {
  std::uint32_t w = c.num_inputs;
  for (const Gate& g : c.gates) {
    unsigned arity = gate_arity(g.kind);
    if (arity >= 1 && g.a >= w) {
      throw TopologyError("gate w" + std::to_string(w) +
                          " references wire w" + std::to_string(g.a));
    }
    if (arity == 2 && g.b >= w) {
      throw TopologyError("gate w" + std::to_string(w) +
                          " references wire w" + std::to_string(g.b));
    }
    ++w;
  }
  if (c.outputs.empty()) throw TopologyError("circuit has no outputs");
  for (std::uint32_t o : c.outputs) {
    if (o >= c.num_wires()) {
      throw TopologyError("output references unknown wire w" + std::to_string(o));
    }
  }
}

// Incremental construction helper. Wires are plain indices; the builder
// guarantees topological order because a gate can only consume wires that
// already exist.
class CircuitBuilder {
 public:
  using Wire = std::uint32_t;

  explicit CircuitBuilder(std::uint32_t num_inputs) { c_.num_inputs = num_inputs; }

  Wire input(std::uint32_t i) const {
    if (i >= c_.num_inputs) throw TopologyError("input index out of range");
    return i;
  }

  Wire xor_(Wire a, Wire b) { return emit({GateKind::Xor, a, b}); }
  Wire and_(Wire a, Wire b) { return emit({GateKind::And, a, b}); }
  Wire not_(Wire a) { return emit({GateKind::Not, a}); }
  Wire const0() { return emit({GateKind::Const0}); }
  Wire const1() { return emit({GateKind::Const1}); }

  // Derived gates over the native basis.
  Wire or_(Wire a, Wire b) { return xor_(xor_(a, b), and_(a, b)); }
  Wire xnor_(Wire a, Wire b) { return not_(xor_(a, b)); }

  // Balanced fold; AND-depth of the tree is ceil(log2(n)) for and_tree and
  // the same count of OR levels for or_tree.
  Wire and_tree(std::vector<Wire> ws) { return fold(std::move(ws), /*is_and=*/true); }
  Wire or_tree(std::vector<Wire> ws) { return fold(std::move(ws), /*is_and=*/false); }

  // Splices `sub` into this circuit with its inputs bound to `bound`;
  // returns the wires carrying the subcircuit's outputs.
  std::vector<Wire> embed(const Circuit& sub, std::span<const Wire> bound) {
    if (bound.size() != sub.num_inputs) {
      throw ArityMismatch("embed: subcircuit expects " +
                          std::to_string(sub.num_inputs) + " inputs, got " +
                          std::to_string(bound.size()));
    }
    std::vector<Wire> map(sub.num_wires());
    std::copy(bound.begin(), bound.end(), map.begin());
    std::size_t w = sub.num_inputs;
    for (const Gate& g : sub.gates) {
      Gate rebased = g;
      if (gate_arity(g.kind) >= 1) rebased.a = map[g.a];
      if (gate_arity(g.kind) == 2) rebased.b = map[g.b];
      map[w++] = emit(rebased);
    }
    std::vector<Wire> outs(sub.outputs.size());
    for (std::size_t i = 0; i < outs.size(); ++i) outs[i] = map[sub.outputs[i]];
    return outs;
  }

  Circuit build(std::vector<Wire> outputs) {
    Circuit done = c_;
    done.outputs.assign(outputs.begin(), outputs.end());
    validate_topology(done);
    return done;
  }

 private:
  Wire emit(Gate g) {
    Wire w = c_.num_wires();
    if (gate_arity(g.kind) >= 1 && g.a >= w) throw TopologyError("bad wire");
    if (gate_arity(g.kind) == 2 && g.b >= w) throw TopologyError("bad wire");
    c_.gates.push_back(g);
    return w;
  }

  Wire fold(std::vector<Wire> ws, bool is_and) {
    if (ws.empty()) return is_and ? const1() : const0();
    while (ws.size() > 1) {
      std::vector<Wire> next;
      next.reserve((ws.size() + 1) / 2);
      for (std::size_t i = 0; i + 1 < ws.size(); i += 2) {
        next.push_back(is_and ? and_(ws[i], ws[i + 1]) : or_(ws[i], ws[i + 1]));
      }
      if (ws.size() % 2 == 1) next.push_back(ws.back());
      ws = std::move(next);
    }
    return ws[0];
  }

  Circuit c_;
};

// ---- Standard builders ----

inline Circuit build_identity(unsigned width) {
  CircuitBuilder b(width);
  std::vector<CircuitBuilder::Wire> outs(width);
  for (unsigned i = 0; i < width; ++i) outs[i] = b.input(i);
  return b.build(outs);
}

// 2*width inputs (a then b, LSB first); one output: 1 iff a == b bitwise.
inline Circuit build_equality(unsigned width) {
  if (width == 0) throw InvalidParams("equality width must be positive");
  CircuitBuilder b(2 * width);
  std::vector<CircuitBuilder::Wire> eq(width);
  for (unsigned i = 0; i < width; ++i) {
    eq[i] = b.xnor_(b.input(i), b.input(width + i));
  }
  return b.build({b.and_tree(eq)});
}

// Inputs: select bit, then a (width bits), then b (width bits).
// Outputs a when select=1, b when select=0: (s AND a_i) XOR (NOT s AND b_i).
inline Circuit build_mux(unsigned width) {
  if (width == 0) throw InvalidParams("mux width must be positive");
  CircuitBuilder b(1 + 2 * width);
  auto s = b.input(0);
  auto ns = b.not_(s);
  std::vector<CircuitBuilder::Wire> outs(width);
  for (unsigned i = 0; i < width; ++i) {
    outs[i] = b.xor_(b.and_(s, b.input(1 + i)), b.and_(ns, b.input(1 + width + i)));
  }
  return b.build(outs);
}

// Ripple-carry adder: 2*width inputs, width+1 outputs (sum bits then carry).
inline Circuit build_adder(unsigned width) {
  if (width == 0) throw InvalidParams("adder width must be positive");
  CircuitBuilder b(2 * width);
  std::vector<CircuitBuilder::Wire> outs;
  outs.reserve(width + 1);
  CircuitBuilder::Wire carry = 0;
  bool have_carry = false;
  for (unsigned i = 0; i < width; ++i) {
    auto a = b.input(i);
    auto bb = b.input(width + i);
    auto axb = b.xor_(a, bb);
    if (!have_carry) {
      outs.push_back(axb);
      carry = b.and_(a, bb);
      have_carry = true;
    } else {
      outs.push_back(b.xor_(axb, carry));
      carry = b.xor_(b.and_(a, bb), b.and_(carry, axb));
    }
  }
  outs.push_back(carry);
  return b.build(outs);
}

// ---- Combinators ----

// Pipelines first's outputs into second's inputs.
inline Circuit compose(const Circuit& first, const Circuit& second) {
  if (first.outputs.size() != second.num_inputs) {
    throw ArityMismatch("compose: " + std::to_string(first.outputs.size()) +
                        " outputs feed a circuit expecting " +
                        std::to_string(second.num_inputs));
  }
  CircuitBuilder b(first.num_inputs);
  std::vector<CircuitBuilder::Wire> ins(first.num_inputs);
  for (std::uint32_t i = 0; i < first.num_inputs; ++i) ins[i] = i;
  auto mids = b.embed(first, ins);
  auto outs = b.embed(second, mids);
  return b.build(outs);
}

namespace detail {

inline Circuit tree_of(const std::vector<Circuit>& cs, bool is_and) {
  std::uint32_t n = cs.empty() ? 0 : cs[0].num_inputs;
  for (const Circuit& c : cs) {
    if (c.num_inputs != n) throw ArityMismatch("tree: mismatched input arity");
    if (c.outputs.size() != 1) throw ArityMismatch("tree: circuits must have one output");
  }
  CircuitBuilder b(n);
  std::vector<CircuitBuilder::Wire> ins(n);
  for (std::uint32_t i = 0; i < n; ++i) ins[i] = i;
  std::vector<CircuitBuilder::Wire> bits;
  bits.reserve(cs.size());
  for (const Circuit& c : cs) bits.push_back(b.embed(c, ins)[0]);
  return b.build({is_and ? b.and_tree(bits) : b.or_tree(bits)});
}

}  // namespace detail

// OR / AND of n single-output circuits over one shared input space.
inline Circuit or_tree(const std::vector<Circuit>& cs) { return detail::tree_of(cs, false); }
inline Circuit and_tree(const std::vector<Circuit>& cs) { return detail::tree_of(cs, true); }

// ---- Netlist serialization ----
//
//   OBLIVION-CIRCUIT v1 inputs=<n>
//   g<k> = XOR w<i> w<j>        (gate k defines wire w<n+k>)
//   outputs = w<i> w<j> ...

inline std::string serialize(const Circuit& c) {
  std::ostringstream out;
  out << "OBLIVION-CIRCUIT v1 inputs=" << c.num_inputs << "\n";
  for (std::size_t k = 0; k < c.gates.size(); ++k) {
    const Gate& g = c.gates[k];
    out << "g" << k << " = " << gate_name(g.kind);
    if (gate_arity(g.kind) >= 1) out << " w" << g.a;
    if (gate_arity(g.kind) == 2) out << " w" << g.b;
    out << "\n";
  }
  out << "outputs =";
  for (std::uint32_t o : c.outputs) out << " w" << o;
  out << "\n";
  return out.str();
}

namespace detail {

inline std::uint32_t parse_wire(const std::string& tok, std::size_t line) {
  if (tok.size() < 2 || tok[0] != 'w') throw ParseError("expected wire, got '" + tok + "'", line);
  for (std::size_t i = 1; i < tok.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(tok[i]))) {
      throw ParseError("bad wire index '" + tok + "'", line);
    }
  }
  return static_cast<std::uint32_t>(std::stoul(tok.substr(1)));
}

}  // namespace detail

inline Circuit parse_circuit(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) throw ParseError("empty circuit file", 1);
  ++lineno;
  const std::string magic = "OBLIVION-CIRCUIT v1 inputs=";
  if (line.rfind(magic, 0) != 0) throw ParseError("missing circuit header", lineno);
  Circuit c;
  try {
    c.num_inputs = static_cast<std::uint32_t>(std::stoul(line.substr(magic.size())));
  } catch (const std::exception&) {
    throw ParseError("bad input count", lineno);
  }

  bool saw_outputs = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    if (head == "outputs") {
      std::string eq;
      ls >> eq;
      if (eq != "=") throw ParseError("expected '=' after outputs", lineno);
      std::string tok;
      while (ls >> tok) c.outputs.push_back(detail::parse_wire(tok, lineno));
      saw_outputs = true;
      break;
    }
    if (head.size() < 2 || head[0] != 'g') throw ParseError("expected gate or outputs line", lineno);
    std::size_t k = 0;
    try {
      k = std::stoul(head.substr(1));
    } catch (const std::exception&) {
      throw ParseError("bad gate index '" + head + "'", lineno);
    }
    if (k != c.gates.size()) {
      throw ParseError("gate index " + std::to_string(k) + " out of order", lineno);
    }
    std::string eq, op;
    ls >> eq >> op;
    if (eq != "=") throw ParseError("expected '=' in gate line", lineno);
    Gate g{};
    if (op == "XOR") g.kind = GateKind::Xor;
    else if (op == "AND") g.kind = GateKind::And;
    else if (op == "NOT") g.kind = GateKind::Not;
    else if (op == "CONST0") g.kind = GateKind::Const0;
    else if (op == "CONST1") g.kind = GateKind::Const1;
    else throw ParseError("unknown gate kind '" + op + "'", lineno);
    std::string tok;
    if (gate_arity(g.kind) >= 1) {
      if (!(ls >> tok)) throw ParseError("missing operand", lineno);
      g.a = detail::parse_wire(tok, lineno);
    }
    if (gate_arity(g.kind) == 2) {
      if (!(ls >> tok)) throw ParseError("missing operand", lineno);
      g.b = detail::parse_wire(tok, lineno);
    }
    if (ls >> tok) throw ParseError("trailing token '" + tok + "'", lineno);
    c.gates.push_back(g);
  }
  if (!saw_outputs) throw ParseError("missing outputs line", lineno + 1);
  validate_topology(c);  // throws TopologyError on forward references
  return c;
}

}  // namespace oblivion
