#pragma once

// One controller: classical pipeline, timing control unit (per-port event
// queues plus a pausable timer), sync unit and message unit.

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dhisq/fabric.hpp"
#include "dhisq/isa.hpp"

namespace dhisq::node {

struct TimedEvent {
  int port = 0;
  std::uint32_t codeword = 0;
  Cycle stamp = 0;           // local timeline cycle
  std::size_t pc = 0;        // issuing instruction, for trace labels
};

enum class SyncMode { kNearby, kRemote };

struct SyncRecord {
  SyncMode mode = SyncMode::kNearby;
  int target = 0;            // neighbor controller id or router address
  Cycle book_local = 0;      // nearby: stamp B at which the pulse leaves
  Cycle point_local = 0;     // sync point S on the local timeline
  Cycle booked = 0;          // global cycle the pulse / request left (B)
  Cycle proposed = 0;        // global cycle of S when booked (T)
  Cycle granted = -1;        // remote: T_m' once the grant arrived
  Cycle grant_arrival = -1;
  Cycle resolved = -1;       // global resumption cycle
  Cycle pad = 0;             // compiler-declared slack included in T
  bool pulse_sent = false;
  std::size_t pc = 0;
};

/// Committed event. `cycle` already includes the node's output delay.
struct TraceRecord {
  Cycle cycle = 0;
  int node = 0;
  int port = 0;
  std::uint32_t codeword = 0;
  std::string label;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

enum class Stall { kNone, kSyncWait, kRecvWait, kQueueFull, kHalted };

std::string_view to_string(Stall stall);

/// Measurement outcome oracle: (node, port, capture index) -> bit.
using OutcomeFn = std::function<int(int node, int port, std::uint64_t index)>;

/// Hooks the node uses to talk to the rest of the system.
struct Outbox {
  std::vector<fabric::Message> messages;
  std::vector<TraceRecord> commits;
  // (commit cycle, port, outcome) for captures; the engine routes them.
  struct Capture {
    Cycle ready = 0;
    int port = 0;
    int value = 0;
  };
  std::vector<Capture> captures;
};

class Controller {
 public:
  Controller(int id, const NodeConfig& config, isa::Program program,
             const fabric::Topology* topology, OutcomeFn outcomes);

  int id() const { return id_; }
  const NodeConfig& config() const { return config_; }

  /// Makes a fabric message visible to this node (pulse, grant or datum).
  void deliver(const fabric::Message& msg, Cycle now);
  /// Advances the TCU by one cycle.
  void tcu_tick(Cycle now, Outbox& out);
  /// Executes at most one instruction.
  void step_pipeline(Cycle now, Outbox& out);

  bool halted() const { return halted_; }
  bool done() const;
  bool paused() const { return paused_; }
  Stall stall() const { return stall_; }
  /// Whether the pipeline could make progress on its next step.
  bool runnable() const;
  /// Sets the local timer for a run starting at global cycle `start` (before
  /// the trigger the pipeline runs while the timer counts up towards 0).
  void start_at(Cycle start) { local_ = start; }
  /// Skips `cycles` idle cycles during fast-forward.
  void idle(Cycle cycles) {
    if (paused_) {
      offset_ += cycles;
    } else {
      local_ += cycles;
    }
  }
  /// Earliest global cycle at which the TCU has something to do, if known.
  std::optional<Cycle> next_tcu_activity(Cycle now) const;

  // state inspection
  std::uint32_t reg(int index) const { return regs_[index]; }
  const std::array<std::uint32_t, isa::kNumRegisters>& regs() const { return regs_; }
  const std::vector<std::uint8_t>& memory() const { return memory_; }
  std::size_t pc() const { return pc_; }
  Cycle timeline() const { return t_op_; }
  Cycle local_time() const { return local_; }
  Cycle pause_offset() const { return offset_; }
  Cycle last_commit() const { return last_commit_; }
  std::uint64_t executed() const { return executed_; }
  const std::vector<SyncRecord>& sync_log() const { return sync_log_; }
  std::size_t queued_events() const;
  std::uint64_t flag_overruns() const { return overruns_; }

 private:
  [[noreturn]] void fault(const std::string& msg) const;
  void execute(const isa::Instruction& inst, Cycle now, Outbox& out);
  bool try_recv(const isa::Instruction& inst, Cycle now);
  std::uint32_t load(std::uint32_t addr, int size, bool sign) const;
  void store(std::uint32_t addr, int size, std::uint32_t value);
  Cycle to_global(Cycle local) const { return local + offset_; }
  void write(int rd, std::uint32_t value) {
    if (rd != 0) regs_[rd] = value;
  }

  int id_;
  NodeConfig config_;
  isa::Program program_;
  const fabric::Topology* topology_;
  OutcomeFn outcomes_;

  std::array<std::uint32_t, isa::kNumRegisters> regs_{};
  std::vector<std::uint8_t> memory_;
  std::size_t pc_ = 0;
  bool halted_ = false;
  Stall stall_ = Stall::kNone;
  std::uint64_t executed_ = 0;

  // TCU
  Cycle local_ = 0;          // local timer; global = local + offset_
  Cycle offset_ = 0;
  Cycle t_op_ = 0;
  bool paused_ = false;
  std::vector<std::deque<TimedEvent>> queues_;
  std::map<int, std::uint64_t> capture_count_;
  Cycle last_commit_ = -1;

  // SyncU
  std::deque<SyncRecord> syncs_;
  std::map<int, bool> flags_;
  std::uint64_t overruns_ = 0;
  std::vector<SyncRecord> sync_log_;

  // MsgU: per-source FIFOs of (arrival global cycle, arrival local cycle, value)
  struct Datum {
    Cycle arrival = 0;
    Cycle arrival_local = 0;
    int src = 0;
    Cycle sent = 0;
    std::uint64_t seq = 0;
    std::int64_t value = 0;
  };
  std::map<int, std::deque<Datum>> inbox_;
};

}  // namespace dhisq::node
