#pragma once

// Benchmarks: the two-board sync experiment, long-range CNOT circuits,
// static-to-dynamic conversion, the synthetic suite and BISP-vs-lockstep
// comparisons.

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "dhisq/dqcc.hpp"
#include "dhisq/fabric.hpp"
#include "dhisq/isa.hpp"
#include "dhisq/sim.hpp"

namespace dhisq::bench {

// two-board sync experiment -------------------------------------------------

struct Fig10Params {
  int iterations = 8;
  int increment = 30;      // cycles added to the control board's waitr per iteration
  int link = 20;           // mesh latency between the boards
  int setup = 20;          // deterministic work after the sync
  int gap = 10;            // yellow -> blue
  int tail = 50;
  int trigger_skew = 57;   // extra trigger delay of the control board
};

struct Fig10 {
  Fig10Params params;
  std::string control_text;
  std::string readout_text;
  isa::Program control;    // node 0
  isa::Program readout;    // node 1
  fabric::Topology topology;
};

Fig10 gen_fig10(const Fig10Params& params = {});

struct Fig10Result {
  sim::RunResult run;
  std::vector<Cycle> control_sync_start;   // global booking cycle per iteration
  std::vector<Cycle> readout_sync_start;
  std::vector<std::pair<Cycle, Cycle>> yellow;  // (control, readout) per iteration
  std::vector<std::pair<Cycle, Cycle>> blue;

  /// Yellow and blue commit in the same cycle on both boards every iteration.
  bool aligned() const;
  /// Change of (control - readout) sync start between consecutive iterations.
  std::vector<Cycle> advance() const;
};

Fig10Result run_fig10(const Fig10& fig, double cycle_ns = 4.0);

// circuits -----------------------------------------------------------------

/// Constant-depth long-range CNOT from q0 to q{n-1} through n-2 ancillas.
/// Bits m1..m{n-2} hold the ancilla outcomes.
dqcc::CircuitIR gen_long_range_cnot(int n);

/// Ladder device: data qubits q0..q{n-1} in a row, ancillas a0..a{n-1}
/// beside them. Column i (q_i, a_i) sits on controller i; neighboring
/// columns share a mesh link.
struct Latencies {
  int mesh = 4;
  int tree_up = 8;
  int tree_down = 8;
  int router_delay = 1;
  int lockstep = 32;
};

struct Device {
  int columns = 0;
  fabric::Topology topology;
  dqcc::MappingConfig mapping;
};

Device ladder_device(int columns, const Latencies& latencies = {});

/// Replaces each non-adjacent CNOT between data qubits with a long-range
/// CNOT over the ancilla row with probability p; the rest become SWAP
/// chains along the data row. Input qubits must be q0..q{k-1}.
dqcc::CircuitIR convert_to_dynamic(const dqcc::CircuitIR& circuit, std::uint64_t seed,
                                   double p = 0.5);

/// Static synthetic circuits on n data qubits: ghz, bv, qft, adder, random.
std::vector<std::string> suite_families();
dqcc::CircuitIR static_circuit(const std::string& family, int n, std::uint64_t seed = 1);

// comparison ---------------------------------------------------------------

struct BenchmarkSpec {
  std::vector<std::string> benchmarks;   // families, or "lrcnot"
  int qubits = 8;
  std::uint64_t seed = 1;
  double substitution_p = 0.5;
  std::vector<double> t_grid_us;         // T1 = T2 values
  int shots = 8;
  Latencies latencies;
  sim::Durations durations;
  double cycle_ns = 4.0;
};

/// Spec with the default grid 30, 60, ..., 300 us and the synthetic suite.
BenchmarkSpec default_spec();

struct ComparisonRow {
  std::string benchmark;
  double t1_us = 0;
  double t2_us = 0;
  double runtime_bisp_ns = 0;
  double runtime_lockstep_ns = 0;
  double reduction_pct = 0;
  double infidelity_bisp = 0;
  double infidelity_lockstep = 0;
  double ratio = 0;                      // lockstep / bisp infidelity
};

/// Builds the named benchmark circuit as it is compiled and run.
dqcc::CircuitIR benchmark_circuit(const BenchmarkSpec& spec, const std::string& name);

std::vector<ComparisonRow> run_comparison(const BenchmarkSpec& spec);

void write_csv(const std::vector<ComparisonRow>& rows, std::ostream& out);
std::string csv_header();

}  // namespace dhisq::bench
