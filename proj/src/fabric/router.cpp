#include <algorithm>

#include "dhisq/error.hpp"
#include "dhisq/fabric.hpp"

namespace dhisq::fabric {

Cycle clamp_grant(Cycle t_m, Cycle now, Cycle max_down_path) {
  return std::max(t_m, now + max_down_path);
}

std::vector<Message> route_step(RouterState& router, const Message& msg, Cycle now,
                                const Topology& topo) {
  std::vector<Message> out;
  auto kids = topo.participating_children(router.addr, msg.group);
  auto emit = [&](MsgKind kind, int dst, Cycle latency, std::int64_t value) {
    Message m;
    m.kind = kind;
    m.src = msg.src;
    m.dst = dst;
    m.from = router.addr;
    m.group = msg.group;
    m.sent = now;
    m.arrival = now + topo.router_delay + latency;
    m.value = value;
    out.push_back(m);
  };

  if (msg.kind == MsgKind::kSyncGrant) {
    auto up = topo.parent.find(router.addr);
    if (up == topo.parent.end() || up->second.parent != msg.from) {
      throw Error(ErrorKind::kRuntime, "router " + std::to_string(router.addr - isa::kRouterAddrBase) +
                                           ": grant from a non-parent");
    }
    for (int kid : kids) emit(MsgKind::kSyncGrant, kid, topo.parent.at(kid).down, msg.value);
    return out;
  }
  if (msg.kind != MsgKind::kSyncRequest) {
    throw Error(ErrorKind::kRuntime, "router received a non-sync message");
  }
  if (std::find(kids.begin(), kids.end(), msg.from) == kids.end()) {
    throw Error(ErrorKind::kRuntime, "router " + std::to_string(router.addr - isa::kRouterAddrBase) +
                                         ": sync request from a non-participating child " +
                                         std::to_string(msg.from));
  }
  auto& buffers = router.pending[msg.group];
  buffers[msg.from].push_back(msg.value);
  auto ready = [&] {
    return std::all_of(kids.begin(), kids.end(),
                       [&](int k) { return buffers.count(k) && !buffers[k].empty(); });
  };
  while (ready()) {
    std::int64_t t_m = 0;
    bool first = true;
    for (int k : kids) {
      t_m = first ? buffers[k].front() : std::max(t_m, buffers[k].front());
      first = false;
      buffers[k].pop_front();
    }
    ++router.decisions;
    if (router.addr == msg.group) {
      Cycle worst = 0;
      for (int p : topo.participants(msg.group)) worst = std::max(worst, topo.down_path(router.addr, p));
      Cycle granted = clamp_grant(t_m, now, worst);
      for (int kid : kids) emit(MsgKind::kSyncGrant, kid, topo.parent.at(kid).down, granted);
    } else {
      const auto& edge = topo.parent.at(router.addr);
      emit(MsgKind::kSyncRequest, edge.parent, edge.up, t_m);
    }
  }
  return out;
}

}  // namespace dhisq::fabric
