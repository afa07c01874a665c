#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include "dhisq/bench.hpp"
#include "dhisq/error.hpp"

namespace dhisq::bench {

namespace {

using dqcc::CircuitIR;
using dqcc::Stmt;
using dqcc::StmtKind;

Stmt gate(std::string name, std::vector<std::string> qubits) {
  Stmt s;
  s.kind = StmtKind::kGate;
  s.name = std::move(name);
  s.qubits = std::move(qubits);
  return s;
}

Stmt measure(const std::string& q, const std::string& bit) {
  Stmt s;
  s.kind = StmtKind::kMeasure;
  s.qubits = {q};
  s.bit = bit;
  return s;
}

Stmt conditional(std::vector<std::string> bits, Stmt body) {
  Stmt s;
  s.kind = StmtKind::kIf;
  s.pred.bits = std::move(bits);
  s.body = {std::move(body)};
  return s;
}

std::string name(char prefix, int i) { return prefix + std::to_string(i); }

// Teleported CNOT c -> t over the ancilla chain `anc` (at least one).
// Even chains start with a Bell pair on (a1, a2); odd chains first copy c
// onto a1. Z-basis outcomes of the pair heads flip t, X-basis outcomes of
// the pair tails flip the phase of c.
void long_range_cnot(std::vector<Stmt>& out, const std::string& c, const std::vector<std::string>& anc,
                     const std::string& t, const std::vector<std::string>& bits) {
  std::size_t m = anc.size();
  std::size_t first = m % 2;  // index of the first Bell-pair head
  std::vector<std::size_t> heads, tails;
  for (std::size_t i = first; i + 1 < m; i += 2) {
    heads.push_back(i);
    tails.push_back(i + 1);
  }
  if (first) tails.insert(tails.begin(), 0);

  for (std::size_t h : heads) out.push_back(gate("h", {anc[h]}));
  if (first) out.push_back(gate("cx", {c, anc[0]}));
  for (std::size_t h : heads) out.push_back(gate("cx", {anc[h], anc[h + 1]}));
  if (!first) out.push_back(gate("cx", {c, anc[0]}));
  for (std::size_t i = first ? 0 : 1; i + 1 < m; i += 2) out.push_back(gate("cx", {anc[i], anc[i + 1]}));
  out.push_back(gate("cx", {anc[m - 1], t}));
  for (std::size_t i : tails) out.push_back(gate("h", {anc[i]}));
  for (std::size_t i = 0; i < m; ++i) out.push_back(measure(anc[i], bits[i]));

  std::vector<std::string> zbits, xbits;
  for (std::size_t h : heads) zbits.push_back(bits[h]);
  for (std::size_t i : tails) xbits.push_back(bits[i]);
  if (!zbits.empty()) out.push_back(conditional(zbits, gate("x", {t})));
  if (!xbits.empty()) out.push_back(conditional(xbits, gate("z", {c})));
}

// Round-trips through the text form so every generated circuit is validated
// by the parser.
CircuitIR finish(CircuitIR ir) { return dqcc::parse_ir(dqcc::print_ir(ir)); }

int data_index(const std::string& q) {
  if (q.size() < 2 || q[0] != 'q') throw Error(ErrorKind::kConfig, "expected data qubit qN, got '" + q + "'");
  return std::stoi(q.substr(1));
}

}  // namespace

CircuitIR gen_long_range_cnot(int n) {
  if (n < 3) throw Error(ErrorKind::kConfig, "long-range CNOT needs at least 3 qubits");
  CircuitIR ir;
  for (int i = 0; i < n; ++i) ir.qubits.push_back(name('q', i));
  std::vector<std::string> anc, bits;
  for (int i = 1; i + 1 < n; ++i) {
    anc.push_back(name('q', i));
    bits.push_back(name('m', i));
  }
  ir.bits = bits;
  long_range_cnot(ir.body, "q0", anc, name('q', n - 1), bits);
  return finish(std::move(ir));
}

Device ladder_device(int columns, const Latencies& lat) {
  if (columns < 1) throw Error(ErrorKind::kConfig, "ladder device needs at least one column");
  Device d;
  d.columns = columns;
  int router = fabric::router_addr(0);
  d.topology.routers = {router};
  d.topology.router_delay = lat.router_delay;
  d.topology.lockstep_latency = lat.lockstep;
  for (int i = 0; i < columns; ++i) {
    NodeConfig c;
    c.ports = 6;
    c.capture_ports = {2, 5};
    d.topology.controllers[i] = c;
    d.topology.parent[i] = {router, lat.tree_up, lat.tree_down};
    if (i > 0) d.topology.add_mesh(i - 1, i, lat.mesh);
    d.mapping.qubits[name('q', i)] = {i, 0, 1, 2};
    d.mapping.qubits[name('a', i)] = {i, 3, 4, 5};
  }
  d.mapping.codewords = dqcc::default_codewords();
  return d;
}

CircuitIR convert_to_dynamic(const CircuitIR& circuit, std::uint64_t seed, double p) {
  int k = 0;
  for (const auto& q : circuit.qubits) k = std::max(k, data_index(q) + 1);
  if (static_cast<int>(circuit.qubits.size()) != k) {
    throw Error(ErrorKind::kConfig, "data qubits must be q0..q" + std::to_string(k - 1));
  }
  CircuitIR out;
  out.qubits = circuit.qubits;
  out.bits = circuit.bits;
  auto bit_of = [&](int i) {
    std::string b = "m_a" + std::to_string(i);
    if (std::find(out.bits.begin(), out.bits.end(), b) == out.bits.end()) out.bits.push_back(b);
    return b;
  };

  std::mt19937_64 rng(seed);
  std::bernoulli_distribution pick(p);
  std::map<int, bool> dirty;  // ancilla measured since its last reset

  auto swap = [&](std::vector<Stmt>& body, const std::string& a, const std::string& b) {
    body.push_back(gate("cx", {a, b}));
    body.push_back(gate("cx", {b, a}));
    body.push_back(gate("cx", {a, b}));
  };

  for (const auto& s : circuit.body) {
    bool far = s.kind == StmtKind::kGate && s.qubits.size() == 2 &&
               std::abs(data_index(s.qubits[0]) - data_index(s.qubits[1])) > 1;
    if (!far) {
      out.body.push_back(s);
      continue;
    }
    if (s.name != "cx" && s.name != "cz") {
      throw Error(ErrorKind::kCompile, "cannot route two-qubit gate '" + s.name + "'");
    }
    int i = data_index(s.qubits[0]), j = data_index(s.qubits[1]);
    int step = j > i ? 1 : -1;
    const std::string& c = s.qubits[0];
    const std::string& t = s.qubits[1];
    if (s.name == "cz") out.body.push_back(gate("h", {t}));
    if (pick(rng)) {
      std::vector<std::string> anc, bits;
      for (int a = i;; a += step) {
        if (dirty[a]) out.body.push_back(conditional({bit_of(a)}, gate("x", {name('a', a)})));
        dirty[a] = true;
        anc.push_back(name('a', a));
        bits.push_back(bit_of(a));
        if (a == j) break;
      }
      long_range_cnot(out.body, c, anc, t, bits);
    } else {
      std::vector<std::pair<std::string, std::string>> swaps;
      for (int a = i; a + step != j; a += step) swaps.push_back({name('q', a), name('q', a + step)});
      for (const auto& [a, b] : swaps) swap(out.body, a, b);
      out.body.push_back(gate("cx", {name('q', j - step), t}));
      for (auto it = swaps.rbegin(); it != swaps.rend(); ++it) swap(out.body, it->first, it->second);
    }
    if (s.name == "cz") out.body.push_back(gate("h", {t}));
  }
  for (const auto& [a, unused] : dirty) out.qubits.push_back(name('a', a));
  return finish(std::move(out));
}

std::vector<std::string> suite_families() { return {"ghz", "bv", "qft", "adder", "random"}; }

CircuitIR static_circuit(const std::string& family, int n, std::uint64_t seed) {
  if (n < 3) throw Error(ErrorKind::kConfig, "synthetic circuits need at least 3 qubits");
  CircuitIR ir;
  for (int i = 0; i < n; ++i) ir.qubits.push_back(name('q', i));
  for (int i = 0; i < n; ++i) ir.bits.push_back(name('c', i));
  auto& b = ir.body;
  auto q = [](int i) { return name('q', i); };
  std::mt19937_64 rng(seed);

  if (family == "ghz") {
    // fan-out from the first qubit
    b.push_back(gate("h", {q(0)}));
    for (int i = 1; i < n; ++i) b.push_back(gate("cx", {q(0), q(i)}));
  } else if (family == "bv") {
    // hidden string 1011...; every query targets the last qubit
    b.push_back(gate("x", {q(n - 1)}));
    for (int i = 0; i < n; ++i) b.push_back(gate("h", {q(i)}));
    for (int i = 0; i + 1 < n; ++i) {
      if (i % 4 != 1) b.push_back(gate("cx", {q(i), q(n - 1)}));
    }
    for (int i = 0; i + 1 < n; ++i) b.push_back(gate("h", {q(i)}));
  } else if (family == "qft") {
    // controlled phases as cx-t-cx ladders
    for (int i = 0; i < n; ++i) {
      b.push_back(gate("h", {q(i)}));
      for (int j = i + 1; j < n; ++j) {
        b.push_back(gate("cx", {q(j), q(i)}));
        b.push_back(gate("t", {q(i)}));
        b.push_back(gate("cx", {q(j), q(i)}));
      }
    }
  } else if (family == "adder") {
    // ripple-carry majority chain; Toffolis in the 6-CNOT decomposition
    auto toffoli = [&](int a, int bb, int c) {
      b.push_back(gate("h", {q(c)}));
      b.push_back(gate("cx", {q(bb), q(c)}));
      b.push_back(gate("tdg", {q(c)}));
      b.push_back(gate("cx", {q(a), q(c)}));
      b.push_back(gate("t", {q(c)}));
      b.push_back(gate("cx", {q(bb), q(c)}));
      b.push_back(gate("tdg", {q(c)}));
      b.push_back(gate("cx", {q(a), q(c)}));
      b.push_back(gate("t", {q(bb)}));
      b.push_back(gate("t", {q(c)}));
      b.push_back(gate("h", {q(c)}));
      b.push_back(gate("cx", {q(a), q(bb)}));
      b.push_back(gate("t", {q(a)}));
      b.push_back(gate("tdg", {q(bb)}));
      b.push_back(gate("cx", {q(a), q(bb)}));
    };
    for (int i = 0; i + 2 < n; i += 2) {
      b.push_back(gate("cx", {q(i + 2), q(i + 1)}));
      b.push_back(gate("cx", {q(i + 2), q(i)}));
      toffoli(i, i + 1, i + 2);
    }
  } else if (family == "random") {
    const char* singles[] = {"h", "x", "s", "t"};
    std::uniform_int_distribution<int> qd(0, n - 1);
    for (int k = 0; k < 3 * n; ++k) {
      int a = qd(rng), c = qd(rng);
      if (a == c || rng() % 3 == 0) {
        b.push_back(gate(singles[rng() % 4], {q(a)}));
      } else {
        b.push_back(gate("cx", {q(a), q(c)}));
      }
    }
  } else {
    throw Error(ErrorKind::kConfig, "unknown benchmark family '" + family + "'");
  }
  for (int i = 0; i < n; ++i) b.push_back(measure(q(i), name('c', i)));
  return finish(std::move(ir));
}

}  // namespace dhisq::bench
