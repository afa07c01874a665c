#pragma once

// Independent reference models used by unit and acceptance tests. None of
// these call into the simulator; they only share plain data types.

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "dhisq/fabric.hpp"

namespace oracle {

// nearby sync ------------------------------------------------------------

inline dhisq::Cycle nearby_resume(dhisq::Cycle b_a, dhisq::Cycle b_b, dhisq::Cycle n) {
  return (b_a > b_b ? b_a : b_b) + n;
}

// remote sync ------------------------------------------------------------

struct Proposal {
  dhisq::Cycle booked = 0;    // B_i, global cycle the request leaves
  dhisq::Cycle proposed = 0;  // T_i
};

struct RemoteOutcome {
  dhisq::Cycle decision = 0;  // cycle the deciding router has every request
  dhisq::Cycle resume = 0;    // earliest cycle every participant can resume together
};

/// Replays the request flow hop by hop over the tree and then scans upward
/// from max(T_i) for the first cycle every grant has reached its leaf.
RemoteOutcome remote_resume(const dhisq::fabric::Topology& topo, int group,
                            const std::map<int, Proposal>& proposals);

// random trees -----------------------------------------------------------

struct TreeSpec {
  int levels = 1;        // router levels, 1..3
  int leaves = 2;
  bool zero_down = false;
  bool zero_delay = false;
};

/// Random router tree with controllers 0..leaves-1 as leaves. Every router
/// has at least one child.
dhisq::fabric::Topology random_tree(std::mt19937& rng, const TreeSpec& spec);

// RV32I reference interpreter ----------------------------------------------

struct RvState {
  std::array<std::uint32_t, 32> x{};
  std::vector<std::uint8_t> mem;
  std::uint32_t pc = 0;  // byte address
  std::uint64_t steps = 0;
  bool ok = true;        // false on a fault
};

/// Executes raw RV32I words until pc leaves the code or `max_steps` runs
/// out. Custom-opcode words are treated as no-ops.
RvState rv_run(const std::vector<std::uint32_t>& words, std::size_t mem_bytes,
               std::uint64_t max_steps);

// state-vector simulator ---------------------------------------------------

class StateVector {
 public:
  explicit StateVector(int qubits);
  int qubits() const { return n_; }
  const std::vector<std::complex<double>>& amplitudes() const { return amp_; }

  void set_basis(std::uint64_t index);
  void set_amplitudes(std::vector<std::complex<double>> amplitudes);
  void h(int q);
  void x(int q);
  void z(int q);
  void phase(int q, double angle);  // diag(1, e^{i angle})
  void cnot(int control, int target);
  void cz(int a, int b);
  /// Projects qubit q onto `bit`; returns the probability of that outcome
  /// before renormalization.
  double measure(int q, int bit);
  /// |<other|this>|
  double overlap(const StateVector& other) const;

 private:
  int n_;
  std::vector<std::complex<double>> amp_;
};

}  // namespace oracle
