#pragma once

// Cycle-driven engine tying controllers and the fabric together, plus the
// trace (TELF) format and the analyses built on traces.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dhisq/fabric.hpp"
#include "dhisq/isa.hpp"
#include "dhisq/node.hpp"

namespace dhisq::sim {

enum class Mode { kBisp, kLockstep };

std::string_view to_string(Mode mode);
Mode mode_from_string(std::string_view text);

struct Durations {
  double single_ns = 20;
  double two_qubit_ns = 40;
  double measure_ns = 300;
};

/// Injected measurement outcomes. Fixed lists win over the random source;
/// a capture past the end of its list reads 0.
struct OutcomeSource {
  std::map<std::pair<int, int>, std::vector<int>> fixed;  // (node, port) -> bits
  bool random = false;
  std::uint64_t seed = 1;
  double p_one = 0.5;

  int outcome(int node, int port, std::uint64_t index, std::uint64_t shot) const;
};

struct SimConfig {
  fabric::Topology topology;
  std::map<int, isa::Program> programs;   // controller id -> program
  double cycle_ns = 4.0;
  Durations durations;
  OutcomeSource outcomes;
  Mode mode = Mode::kBisp;
  int shots = 1;
  Cycle cycle_cap = 10'000'000;
  Cycle start_lead = 16;        // pipeline cycles executed before the global trigger
  bool fast_forward = true;
};

using node::TraceRecord;
using node::SyncRecord;

struct SyncEntry {
  int node = 0;
  SyncRecord record;
};

/// Exposure window of one qubit in ns, from its first op start to its last op end.
struct Window {
  double start_ns = 0;
  double end_ns = 0;
};

struct ShotResult {
  std::vector<TraceRecord> traces;        // sorted by (cycle, node, port)
  std::vector<SyncEntry> syncs;
  std::map<std::string, Window> windows;  // keyed by qubit name
  Cycle end_cycle = 0;                    // last commit cycle over all controllers
  double runtime_ns = 0;
  Cycle cycles_simulated = 0;
  std::map<int, std::uint64_t> flag_overruns;
};

struct RunResult {
  Mode mode = Mode::kBisp;
  double cycle_ns = 4.0;
  std::vector<ShotResult> shots;
  std::uint64_t config_hash = 0;

  double mean_runtime_ns() const;
};

/// Runs every shot; throws Error(kDeadlock) when the system cannot make
/// progress and Error(kRuntime) on a node fault or the cycle cap.
RunResult run(const SimConfig& config);

/// Stable 64-bit FNV-1a hash of everything that influences the run.
std::uint64_t config_hash(const SimConfig& config);

// TELF --------------------------------------------------------------------

void emit_telf(const std::vector<TraceRecord>& traces, double cycle_ns, std::uint64_t hash,
               std::ostream& out);
std::string emit_telf(const std::vector<TraceRecord>& traces, double cycle_ns, std::uint64_t hash);

struct TelfFile {
  std::uint64_t hash = 0;
  double cycle_ns = 4.0;
  std::vector<TraceRecord> traces;
};
TelfFile parse_telf(std::string_view text);

// analyses ----------------------------------------------------------------

/// Per-qubit exposure windows from labelled records ("gate@q0" / "gate@q0,q1").
std::map<std::string, Window> qubit_windows(const std::vector<TraceRecord>& traces,
                                            double cycle_ns, const Durations& durations);

double estimate_fidelity(const std::map<std::string, Window>& windows, double t1_s, double t2_s);
double estimate_infidelity(const std::map<std::string, Window>& windows, double t1_s, double t2_s);
/// Mean infidelity over the shots of a run.
double mean_infidelity(const RunResult& result, double t1_s, double t2_s);

struct SyncEvent {
  bool remote = false;
  int target = 0;                 // router address, or the higher neighbor id
  std::vector<int> participants;
  Cycle resolved = 0;             // latest resumption among participants
  bool simultaneous = true;       // all participants resumed in the same cycle
  Cycle max_proposed = 0;         // max(T_i - pad_i)
  Cycle overhead = 0;             // resolved - max_proposed, >= 0
};

/// Groups per-controller sync records into synchronization events: the k-th
/// nearby sync between a pair, or the k-th region sync a controller issued
/// to a router. Throws Error(kRuntime) when a sync has no partner record.
std::vector<SyncEvent> sync_overhead(const std::vector<SyncEntry>& syncs,
                                     const fabric::Topology& topology);

/// Plain-text run report: runtime per shot, sync overheads, qubit windows.
void write_report(const RunResult& result, const fabric::Topology& topology, std::ostream& out);

}  // namespace dhisq::sim
