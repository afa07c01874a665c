#include <algorithm>

#include "dhisq/error.hpp"
#include "dhisq/fabric.hpp"

namespace dhisq::fabric {

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::kConfig, msg); }

std::string name(int addr) {
  if (is_router(addr)) return "router " + std::to_string(addr - isa::kRouterAddrBase);
  return "controller " + std::to_string(addr);
}

}  // namespace

void Topology::add_mesh(int a, int b, int latency) {
  auto key = std::minmax(a, b);
  auto it = mesh.find({key.first, key.second});
  if (it != mesh.end() && it->second != latency) {
    config_error("asymmetric mesh latency between controllers " + std::to_string(a) + " and " +
                 std::to_string(b));
  }
  mesh[{key.first, key.second}] = latency;
}

void Topology::validate() const {
  if (controllers.empty()) config_error("topology has no controllers");
  if (router_delay < 0) config_error("router delay must be >= 0");
  if (lockstep_latency < 1) config_error("lock-step latency must be >= 1");
  for (const auto& [id, cfg] : controllers) {
    if (id < 0 || id > isa::kMaxControllerId) config_error("controller id out of range: " + std::to_string(id));
    if (cfg.ports < 1 || cfg.ports > 256) config_error(name(id) + ": port count must be in [1, 256]");
    for (int p : cfg.capture_ports) {
      if (p < 0 || p >= cfg.ports) config_error(name(id) + ": capture port out of range");
    }
    if (cfg.capture_latency < 1) config_error(name(id) + ": capture latency must be >= 1");
    if (cfg.queue_depth < 1 || cfg.sync_queue_depth < 1) config_error(name(id) + ": queue depth must be >= 1");
    if (cfg.pipeline_ratio < 1) config_error(name(id) + ": pipeline ratio must be >= 1");
    if (cfg.recv_anchor < 1) config_error(name(id) + ": recv anchor must be >= 1");
    if (cfg.output_delay < 0) config_error(name(id) + ": output delay must be >= 0");
    if (!routers.empty() && !parent.count(id)) config_error(name(id) + " has no parent router");
  }
  for (int r : routers) {
    if (!is_router(r)) config_error("router address below 256: " + std::to_string(r));
  }
  for (const auto& [child, edge] : parent) {
    if (!controllers.count(child) && !routers.count(child)) {
      config_error("tree edge from unknown node " + std::to_string(child));
    }
    if (!routers.count(edge.parent)) config_error(name(child) + ": parent is not a router");
    if (edge.up < 1) config_error(name(child) + ": uplink latency must be >= 1");
    if (edge.down < 0) config_error(name(child) + ": downlink latency must be >= 0");
  }
  if (!routers.empty()) {
    int roots = 0;
    for (int r : routers) {
      if (!parent.count(r)) ++roots;
      // cycle check: walking up must terminate
      std::set<int> seen;
      for (int a = r; parent.count(a); a = parent.at(a).parent) {
        if (!seen.insert(a).second) config_error("tree contains a cycle at " + name(r));
      }
    }
    if (roots != 1) config_error("router tree must have exactly one root");
  }
  for (const auto& [key, n] : mesh) {
    if (key.first == key.second) config_error("mesh self-loop on controller " + std::to_string(key.first));
    if (!controllers.count(key.first) || !controllers.count(key.second)) {
      config_error("mesh edge references an unknown controller");
    }
    if (n < 1) config_error("mesh latency must be >= 1");
  }
  for (const auto& [r, members] : sync_groups) {
    if (!routers.count(r)) config_error("sync group on unknown router " + std::to_string(r));
    if (members.empty()) config_error("empty sync group on " + name(r));
    for (int m : members) {
      if (!controllers.count(m) || !is_ancestor(r, m)) {
        config_error("sync group member " + std::to_string(m) + " is not under " + name(r));
      }
    }
  }
}

std::optional<int> Topology::mesh_latency(int a, int b) const {
  auto key = std::minmax(a, b);
  auto it = mesh.find({key.first, key.second});
  if (it == mesh.end()) return std::nullopt;
  return it->second;
}

std::vector<int> Topology::children(int router) const {
  std::vector<int> out;
  for (const auto& [child, edge] : parent) {
    if (edge.parent == router) out.push_back(child);
  }
  return out;
}

std::vector<int> Topology::leaves_under(int addr) const {
  if (!is_router(addr)) return {addr};
  std::vector<int> out;
  for (const auto& [id, cfg] : controllers) {
    if (is_ancestor(addr, id)) out.push_back(id);
  }
  return out;
}

std::vector<int> Topology::ancestors(int addr) const {
  std::vector<int> out;
  for (auto it = parent.find(addr); it != parent.end(); it = parent.find(it->second.parent)) {
    out.push_back(it->second.parent);
  }
  return out;
}

bool Topology::is_ancestor(int router, int addr) const {
  auto chain = ancestors(addr);
  return std::find(chain.begin(), chain.end(), router) != chain.end();
}

int Topology::lca(int a, int b) const {
  auto up_a = ancestors(a);
  auto up_b = ancestors(b);
  for (int r : up_a) {
    if (r == b) return r;
    if (std::find(up_b.begin(), up_b.end(), r) != up_b.end()) return r;
  }
  config_error(name(a) + " and " + name(b) + " share no router");
}

int Topology::root() const {
  for (int r : routers) {
    if (!parent.count(r)) return r;
  }
  config_error("topology has no router tree");
}

int Topology::height() const {
  int h = 0;
  for (const auto& [id, cfg] : controllers) h = std::max<int>(h, static_cast<int>(ancestors(id).size()));
  return h;
}

std::vector<int> Topology::participants(int router) const {
  auto it = sync_groups.find(router);
  if (it != sync_groups.end()) {
    auto members = it->second;
    std::sort(members.begin(), members.end());
    return members;
  }
  return leaves_under(router);
}

std::vector<int> Topology::participating_children(int router, int group) const {
  std::vector<int> out;
  auto members = participants(group);
  for (int child : children(router)) {
    for (int m : members) {
      if (m == child || is_ancestor(child, m)) {
        out.push_back(child);
        break;
      }
    }
  }
  return out;
}

Cycle Topology::down_path(int router, int leaf) const {
  Cycle total = router_delay;
  for (int a = leaf; a != router;) {
    const auto& edge = parent.at(a);
    total += edge.down;
    if (edge.parent != router) total += router_delay;
    a = edge.parent;
  }
  return total;
}

Cycle Topology::up_path(int leaf, int router) const {
  Cycle total = 0;
  for (int a = leaf; a != router;) {
    const auto& edge = parent.at(a);
    total += edge.up;
    if (edge.parent != router) total += router_delay;
    a = edge.parent;
  }
  return total;
}

Cycle Topology::datum_latency(int src, int dst) const {
  if (src == dst) return 0;
  if (src == isa::kCentralAddr || dst == isa::kCentralAddr) return lockstep_latency;
  if (auto n = mesh_latency(src, dst)) return *n;
  int top = lca(src, dst);
  return up_path(src, top) + down_path(top, dst);
}

bool delivery_before(const Message& a, const Message& b) {
  if (a.arrival != b.arrival) return a.arrival < b.arrival;
  if (a.src != b.src) return a.src < b.src;
  if (a.sent != b.sent) return a.sent < b.sent;
  return a.seq < b.seq;
}

}  // namespace dhisq::fabric
