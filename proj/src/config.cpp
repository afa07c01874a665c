#include "dhisq/config.hpp"

#include <fstream>
#include <sstream>

#include "dhisq/error.hpp"

namespace dhisq::config {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorKind::kConfig, what); }

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    bad(std::string("field '") + key + "' has the wrong type");
  }
}

const Json& object(const Json& j, const char* what) {
  if (!j.is_object()) bad(std::string(what) + " must be a JSON object");
  return j;
}

int as_int(const std::string& key, const char* what) {
  try {
    std::size_t used = 0;
    int v = std::stoi(key, &used);
    if (used == key.size()) return v;
  } catch (const std::exception&) {
  }
  bad(std::string(what) + " key '" + key + "' is not an integer");
}

}  // namespace

fabric::Topology topology_from_json(const Json& j) {
  object(j, "topology");
  fabric::Topology t;
  t.router_delay = get_or(j, "router_delay", t.router_delay);
  t.lockstep_latency = get_or(j, "lockstep_latency", t.lockstep_latency);
  for (int r : get_or(j, "routers", std::vector<int>{})) t.routers.insert(r);
  if (!j.contains("controllers") || !j["controllers"].is_array()) bad("topology needs a 'controllers' array");
  for (const auto& c : j["controllers"]) {
    object(c, "controller");
    if (!c.contains("id")) bad("controller entry without 'id'");
    int id = get_or(c, "id", 0);
    if (t.controllers.count(id)) bad("duplicate controller " + std::to_string(id));
    NodeConfig n;
    n.ports = get_or(c, "ports", n.ports);
    for (int p : get_or(c, "capture_ports", std::vector<int>{})) n.capture_ports.insert(p);
    n.capture_latency = get_or(c, "capture_latency", n.capture_latency);
    n.output_delay = get_or(c, "output_delay", n.output_delay);
    n.queue_depth = get_or(c, "queue_depth", n.queue_depth);
    n.sync_queue_depth = get_or(c, "sync_queue_depth", n.sync_queue_depth);
    n.pipeline_ratio = get_or(c, "pipeline_ratio", n.pipeline_ratio);
    n.recv_anchor = get_or(c, "recv_anchor", n.recv_anchor);
    n.memory_bytes = get_or(c, "memory_bytes", n.memory_bytes);
    t.controllers[id] = n;
    if (c.contains("parent")) {
      t.parent[id] = {get_or(c, "parent", 0), get_or(c, "up", 1), get_or(c, "down", 1)};
    }
  }
  for (const auto& e : get_or(j, "router_edges", Json::array())) {
    object(e, "router edge");
    if (!e.contains("child") || !e.contains("parent")) bad("router edge needs 'child' and 'parent'");
    t.parent[get_or(e, "child", 0)] = {get_or(e, "parent", 0), get_or(e, "up", 1), get_or(e, "down", 1)};
  }
  for (const auto& m : get_or(j, "mesh", Json::array())) {
    if (!m.is_array() || m.size() != 3) bad("mesh entries are [a, b, latency]");
    t.add_mesh(m[0].get<int>(), m[1].get<int>(), m[2].get<int>());
  }
  Json groups = get_or(j, "sync_groups", Json::object());
  for (const auto& [key, members] : groups.items()) {
    t.sync_groups[as_int(key, "sync_groups")] = members.get<std::vector<int>>();
  }
  t.validate();
  return t;
}

Json topology_to_json(const fabric::Topology& t) {
  Json j;
  j["router_delay"] = t.router_delay;
  j["lockstep_latency"] = t.lockstep_latency;
  j["routers"] = std::vector<int>(t.routers.begin(), t.routers.end());
  Json cs = Json::array();
  for (const auto& [id, n] : t.controllers) {
    Json c;
    c["id"] = id;
    if (auto it = t.parent.find(id); it != t.parent.end()) {
      c["parent"] = it->second.parent;
      c["up"] = it->second.up;
      c["down"] = it->second.down;
    }
    c["ports"] = n.ports;
    c["capture_ports"] = std::vector<int>(n.capture_ports.begin(), n.capture_ports.end());
    c["capture_latency"] = n.capture_latency;
    c["output_delay"] = n.output_delay;
    c["queue_depth"] = n.queue_depth;
    c["sync_queue_depth"] = n.sync_queue_depth;
    c["pipeline_ratio"] = n.pipeline_ratio;
    c["recv_anchor"] = n.recv_anchor;
    c["memory_bytes"] = n.memory_bytes;
    cs.push_back(c);
  }
  j["controllers"] = cs;
  Json edges = Json::array();
  for (const auto& [child, e] : t.parent) {
    if (fabric::is_router(child)) edges.push_back({{"child", child}, {"parent", e.parent}, {"up", e.up}, {"down", e.down}});
  }
  j["router_edges"] = edges;
  Json mesh = Json::array();
  for (const auto& [ab, n] : t.mesh) mesh.push_back({ab.first, ab.second, n});
  j["mesh"] = mesh;
  Json groups = Json::object();
  for (const auto& [r, members] : t.sync_groups) groups[std::to_string(r)] = members;
  j["sync_groups"] = groups;
  return j;
}

dqcc::MappingConfig mapping_from_json(const Json& j) {
  object(j, "mapping");
  dqcc::MappingConfig m;
  if (!j.contains("qubits")) bad("mapping needs a 'qubits' object");
  for (const auto& [q, p] : object(j["qubits"], "qubits").items()) {
    object(p, "qubit ports");
    if (!p.contains("controller")) bad("qubit '" + q + "' has no controller");
    m.qubits[q] = {get_or(p, "controller", 0), get_or(p, "drive", 0), get_or(p, "flux", 1), get_or(p, "measure", 2)};
  }
  m.codewords = dqcc::default_codewords();
  Json codewords = get_or(j, "codewords", Json::object());
  Json overrides = get_or(j, "overrides", Json::object());
  for (const auto& [g, cw] : codewords.items()) m.codewords[g] = cw.get<std::uint32_t>();
  for (const auto& [k, cw] : overrides.items()) m.overrides[k] = cw.get<std::uint32_t>();
  return m;
}

Json mapping_to_json(const dqcc::MappingConfig& m) {
  Json j;
  Json qs = Json::object();
  for (const auto& [q, p] : m.qubits) {
    qs[q] = {{"controller", p.controller}, {"drive", p.drive}, {"flux", p.flux}, {"measure", p.measure}};
  }
  j["qubits"] = qs;
  j["codewords"] = m.codewords;
  j["overrides"] = m.overrides;
  return j;
}

bench::BenchmarkSpec spec_from_json(const Json& j) {
  object(j, "benchmark spec");
  bench::BenchmarkSpec s = bench::default_spec();
  s.benchmarks = get_or(j, "benchmarks", s.benchmarks);
  s.qubits = get_or(j, "qubits", s.qubits);
  s.seed = get_or(j, "seed", s.seed);
  s.substitution_p = get_or(j, "substitution_p", s.substitution_p);
  s.t_grid_us = get_or(j, "t_grid_us", s.t_grid_us);
  s.shots = get_or(j, "shots", s.shots);
  s.cycle_ns = get_or(j, "cycle_ns", s.cycle_ns);
  if (j.contains("latencies")) {
    const Json& l = object(j["latencies"], "latencies");
    s.latencies.mesh = get_or(l, "mesh", s.latencies.mesh);
    s.latencies.tree_up = get_or(l, "tree_up", s.latencies.tree_up);
    s.latencies.tree_down = get_or(l, "tree_down", s.latencies.tree_down);
    s.latencies.router_delay = get_or(l, "router_delay", s.latencies.router_delay);
    s.latencies.lockstep = get_or(l, "lockstep", s.latencies.lockstep);
  }
  if (j.contains("durations")) {
    const Json& d = object(j["durations"], "durations");
    s.durations.single_ns = get_or(d, "single_ns", s.durations.single_ns);
    s.durations.two_qubit_ns = get_or(d, "two_qubit_ns", s.durations.two_qubit_ns);
    s.durations.measure_ns = get_or(d, "measure_ns", s.durations.measure_ns);
  }
  if (s.substitution_p < 0 || s.substitution_p > 1) bad("substitution_p must be within [0, 1]");
  if (s.qubits < 3) bad("benchmarks need at least 3 qubits");
  return s;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

Json read_json(const std::filesystem::path& path) {
  std::string text = read_text(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    bad(path.string() + ": " + e.what());
  }
}

}  // namespace dhisq::config
