#pragma once

// Communication substrate: mesh links between neighboring controllers, a
// tree of routers above them, and router-side aggregation of region syncs.

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "dhisq/isa.hpp"

namespace dhisq {

using Cycle = std::int64_t;

/// Per-controller hardware parameters.
struct NodeConfig {
  int ports = 8;
  std::set<int> capture_ports;   // cw on these ports triggers a measurement capture
  int capture_latency = 75;      // commit to result-available, cycles (300 ns)
  int output_delay = 0;          // trigger delay between commit and the physical output
  int queue_depth = 1024;        // per-port event queue entries
  int sync_queue_depth = 16;
  int pipeline_ratio = 1;        // TCU cycles per executed instruction
  int recv_anchor = 8;           // timeline slack added after a datum arrives
  std::size_t memory_bytes = 4096;
};

}  // namespace dhisq

namespace dhisq::fabric {

inline bool is_router(int addr) { return addr >= isa::kRouterAddrBase; }
inline int router_addr(int index) { return isa::kRouterAddrBase + index; }

struct TreeEdge {
  int parent = 0;  // router address
  int up = 1;      // child -> parent latency, cycles
  int down = 1;    // parent -> child latency, cycles
};

/// Hybrid topology. Controllers are addressed by id (0..254), routers by
/// 256 + index. Every controller hangs off exactly one router.
struct Topology {
  std::map<int, NodeConfig> controllers;
  std::set<int> routers;
  std::map<int, TreeEdge> parent;                 // child address -> edge
  std::map<std::pair<int, int>, int> mesh;        // (lo, hi) -> N
  int router_delay = 1;
  int lockstep_latency = 32;                      // central broadcast, cycles
  std::map<int, std::vector<int>> sync_groups;    // explicit participants per router

  /// Throws Error(kConfig) on any structural problem.
  void validate() const;

  void add_mesh(int a, int b, int latency);
  std::optional<int> mesh_latency(int a, int b) const;
  std::vector<int> children(int router) const;
  std::vector<int> leaves_under(int addr) const;
  std::vector<int> ancestors(int addr) const;     // nearest first
  bool is_ancestor(int router, int addr) const;
  int lca(int a, int b) const;
  int root() const;
  int height() const;

  /// Participants of a region sync addressed to `router`.
  std::vector<int> participants(int router) const;
  /// Children of `router` whose subtree holds a participant of `group`.
  std::vector<int> participating_children(int router, int group) const;

  /// Total grant latency from the deciding router's decision to the leaf,
  /// including the processing delay of every router on the way down.
  Cycle down_path(int router, int leaf) const;
  Cycle up_path(int leaf, int router) const;

  /// Classical datum latency: direct mesh edge when adjacent, else routed
  /// through the tree via the lowest common ancestor. Central (255) uses the
  /// lock-step constant.
  Cycle datum_latency(int src, int dst) const;
};

enum class MsgKind { kSyncPulse, kSyncRequest, kSyncGrant, kDatum };

struct Message {
  MsgKind kind = MsgKind::kDatum;
  int src = 0;        // originating controller (or 255)
  int dst = 0;        // hop destination address
  int from = 0;       // hop source address
  int group = 0;      // router address of the region sync
  Cycle sent = 0;
  Cycle arrival = 0;
  std::int64_t value = 0;  // T_i, T_m or datum word
  std::uint64_t seq = 0;
};

/// Delivery order for messages arriving in the same cycle.
bool delivery_before(const Message& a, const Message& b);

struct RouterState {
  int addr = 0;
  // group -> child -> buffered proposed points
  std::map<int, std::map<int, std::deque<std::int64_t>>> pending;
  std::uint64_t decisions = 0;
};

Cycle clamp_grant(Cycle t_m, Cycle now, Cycle max_down_path);

/// One router step for an arriving request/grant. Returned messages carry
/// their send cycle and arrival cycle already.
std::vector<Message> route_step(RouterState& router, const Message& msg, Cycle now,
                                const Topology& topo);

}  // namespace dhisq::fabric
