#pragma once

// Dynamic-circuit compiler: a small circuit IR, qubit-to-controller mapping,
// ASAP scheduling, sync insertion with booking, and per-controller HISQ
// code generation for BISP and the lock-step baseline.

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "dhisq/fabric.hpp"
#include "dhisq/isa.hpp"
#include "dhisq/sim.hpp"

namespace dhisq::dqcc {

// IR -----------------------------------------------------------------------

/// Parity of the listed bits, optionally negated. `if (c0)` is {c0}.
struct Predicate {
  std::vector<std::string> bits;
  bool negate = false;

  friend bool operator==(const Predicate&, const Predicate&) = default;
};

enum class StmtKind { kGate, kMeasure, kIf, kBarrier, kRepeat };

struct Stmt {
  StmtKind kind = StmtKind::kGate;
  std::string name;                  // gate name
  std::vector<std::string> qubits;   // gate / measure / barrier operands
  std::string bit;                   // measure target
  Predicate pred;                    // if
  std::vector<Stmt> body;            // if / repeat
  int count = 0;                     // repeat
  std::size_t line = 0;              // source line, not part of equality

  friend bool operator==(const Stmt& a, const Stmt& b) {
    return a.kind == b.kind && a.name == b.name && a.qubits == b.qubits && a.bit == b.bit &&
           a.pred == b.pred && a.body == b.body && a.count == b.count;
  }
};

struct CircuitIR {
  std::vector<std::string> qubits;
  std::vector<std::string> bits;
  std::vector<Stmt> body;

  friend bool operator==(const CircuitIR&, const CircuitIR&) = default;

  int qubit_index(const std::string& name) const;  // -1 when undeclared
  int bit_index(const std::string& name) const;
};

bool is_single_qubit_gate(std::string_view name);
bool is_two_qubit_gate(std::string_view name);

/// Throws SyntaxError on malformed text, undeclared names, arity mismatch or
/// a conditional on a bit that was never measured before it.
CircuitIR parse_ir(std::string_view text);
std::string print_ir(const CircuitIR& ir);

// mapping ------------------------------------------------------------------

struct QubitPorts {
  int controller = 0;
  int drive = 0;
  int flux = 1;
  int measure = 2;

  friend bool operator==(const QubitPorts&, const QubitPorts&) = default;
};

struct MappingConfig {
  std::map<std::string, QubitPorts> qubits;
  std::map<std::string, std::uint32_t> codewords;   // gate name -> codeword
  std::map<std::string, std::uint32_t> overrides;   // "gate@q0[,q1]" -> codeword

  /// Throws Error(kCompile) on a table miss.
  std::uint32_t codeword(const std::string& gate, const std::vector<std::string>& qubits) const;
  const QubitPorts& ports(const std::string& qubit) const;

  friend bool operator==(const MappingConfig&, const MappingConfig&) = default;
};

/// Qubit i on controller first_id + i, default ports and codewords.
MappingConfig one_per_controller(const CircuitIR& ir, int first_id = 0);
std::map<std::string, std::uint32_t> default_codewords();

// schedule -----------------------------------------------------------------

struct CompileOptions {
  fabric::Topology topology;
  sim::Durations durations;
  double cycle_ns = 4.0;
  sim::Mode mode = sim::Mode::kBisp;
  bool hoist = true;  // book nearby syncs early; false books at the ready point
};

enum class SyncNeed { kNone, kNearby, kRegion };

struct ScheduledOp {
  std::size_t id = 0;                // position in the flattened statement order
  std::string gate;                  // gate name or "measure"
  std::vector<std::string> qubits;
  std::string bit;
  Cycle start = 0;                   // nominal global cycle
  Cycle duration = 0;
  std::vector<int> controllers;
  SyncNeed sync = SyncNeed::kNone;
  int conditional = -1;              // index of the enclosing if, or -1
};

struct SyncPoint {
  SyncNeed kind = SyncNeed::kNearby;
  std::vector<int> controllers;
  int target = 0;                    // router address for region syncs
  std::map<int, Cycle> booking;      // controller -> nominal booking cycle s
  std::map<int, Cycle> point;        // controller -> own sync point s + N
  Cycle ready = 0;                   // earliest start of the synchronized op
  Cycle resolved = 0;                // predicted common resumption
  Cycle predicted_overhead = 0;      // resolved - ready
  std::size_t op = 0;
};

/// Per-controller lowering steps in nominal time, consumed by codegen.
struct Step {
  enum class Kind {
    kOp,         // cw.i.i
    kSync,       // sync booking
    kSyncPoint,  // shift of the local timeline after a pause
    kForward,    // recv own capture, forward to consumers, store locally
    kCond,       // BISP conditional region
    kLockIf,     // lock-step conditional region (every controller)
    kDrain,      // discard unread captures
  };
  Kind kind = Kind::kOp;
  Cycle time = 0;
  std::size_t seq = 0;
  int op = -1;                       // kOp / kSync: scheduled op id

  // kOp
  int port = 0;
  std::uint32_t codeword = 0;
  std::string label;
  // kSync
  int target = 0;
  Cycle pad = 0;
  Cycle advance = 0;                 // timeline advance of the sync instruction
  // kSyncPoint
  Cycle delta = 0;
  // kForward / kDrain / kCond / kLockIf
  int source = 0;
  int drains = 0;
  std::vector<int> sends;
  int store = -1;                    // memory address, or -1
  std::vector<std::pair<int, int>> recvs;  // (source, store address)
  std::vector<Cycle> arrivals;       // nominal arrival of each recv
  int meas = -1;                     // kForward: measurement forwarded
  Cycle depart = 0;                  // kForward: nominal cycle before the first send
  int cond = -1;                     // kCond / kLockIf: conditional index
  Cycle recv_anchor = 0;             // nominal anchor after the recvs
  std::vector<int> pred_addrs;
  bool negate = false;
  Cycle region = 0;                  // first cycle body ops may start
  Cycle reserved = 0;                // lock-step reserved length d
  std::vector<Step> body;
};

/// Corrections found by walking the emitted code with a nominal pipeline
/// model; the scheduler folds them back in until they stop changing.
struct Tuning {
  std::map<int, Cycle> depart_delay;  // measurement -> extra forwarding delay
  std::map<int, Cycle> extra_pad;     // conditional -> extra branch pad
  std::map<int, Cycle> op_delay;      // op outside a conditional -> later start
  std::map<std::pair<int, int>, Cycle> sync_delay;  // (op, controller) -> later booking

  bool empty() const {
    return depart_delay.empty() && extra_pad.empty() && op_delay.empty() && sync_delay.empty();
  }
};

struct Plan {
  std::map<int, std::vector<Step>> steps;   // controller -> steps
  std::map<int, Cycle> busy_end;            // per controller, repeat bodies
  int repeat = 0;                           // 0 when there is no shot loop
  int region_router = -1;                   // BISP shot-loop sync target
  std::vector<int> participants;
};

struct Schedule {
  CircuitIR ir;
  MappingConfig mapping;
  CompileOptions options;
  std::vector<ScheduledOp> ops;
  std::vector<SyncPoint> syncs;
  std::vector<std::string> diagnostics;
  bool synced = false;
  Cycle makespan = 0;                       // nominal end of the last op
  Plan plan;
  Tuning tuning;

  double ns(Cycle c) const { return static_cast<double>(c) * options.cycle_ns; }
};

/// ASAP schedule with sync requirements marked but no syncs placed.
Schedule schedule(const CircuitIR& ir, const MappingConfig& mapping, const CompileOptions& options);
/// Re-times the schedule with sync instructions booked as early as allowed.
Schedule insert_sync(const Schedule& sched);

// codegen ------------------------------------------------------------------

struct Compiled {
  sim::Mode mode = sim::Mode::kBisp;
  std::map<int, isa::Program> programs;
  std::map<int, std::vector<int>> sync_groups;
  std::string manifest;  // JSON

  /// Copies programs, mode and sync groups into a simulator config.
  void apply(sim::SimConfig& config) const;
};

/// Nominal pipeline check of the lowered programs (branches taken). Returns
/// the additional tuning needed for the schedule to hold exactly.
Tuning check_pipeline(const Schedule& sched);

Compiled codegen_bisp(const Schedule& sched);
Compiled codegen_lockstep(const Schedule& sched);

/// schedule + insert_sync + codegen for options.mode.
Compiled compile(const CircuitIR& ir, const MappingConfig& mapping, const CompileOptions& options);

}  // namespace dhisq::dqcc
