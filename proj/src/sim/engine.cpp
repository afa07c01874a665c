#include <algorithm>
#include <set>
#include <sstream>

#include "dhisq/error.hpp"
#include "dhisq/sim.hpp"

namespace dhisq::sim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct MessageOrder {
  bool operator()(const fabric::Message& a, const fabric::Message& b) const {
    return fabric::delivery_before(a, b);
  }
};

using MessageQueue = std::multiset<fabric::Message, MessageOrder>;

class Engine {
 public:
  Engine(const SimConfig& config, int shot) : config_(config), shot_(shot) {
    for (const auto& [id, cfg] : config.topology.controllers) {
      isa::Program program;
      if (auto it = config.programs.find(id); it != config.programs.end()) program = it->second;
      node::OutcomeFn fn = [this](int n, int port, std::uint64_t k) {
        return config_.outcomes.outcome(n, port, k, static_cast<std::uint64_t>(shot_));
      };
      nodes_.emplace_back(id, cfg, std::move(program), &config.topology, fn);
    }
    for (int r : config.topology.routers) routers_[r].addr = r;
  }

  ShotResult run() {
    Cycle g = -config_.start_lead;
    for (auto& n : nodes_) n.start_at(g);
    ShotResult result;
    while (true) {
      if (g > config_.cycle_cap) {
        throw Error(ErrorKind::kRuntime,
                    "cycle cap " + std::to_string(config_.cycle_cap) + " reached");
      }
      route_phase(g);
      deliver_phase(g);
      node::Outbox out;
      for (auto& n : nodes_) n.tcu_tick(g, out);
      for (auto& n : nodes_) n.step_pipeline(g, out);
      absorb(out, result);
      if (std::all_of(nodes_.begin(), nodes_.end(), [](const auto& n) { return n.done(); })) break;
      g = next_cycle(g);
    }
    result.cycles_simulated = g;
    std::sort(result.traces.begin(), result.traces.end(), [](const auto& a, const auto& b) {
      return std::tie(a.cycle, a.node, a.port) < std::tie(b.cycle, b.node, b.port);
    });
    result.end_cycle = 0;
    for (const auto& n : nodes_) {
      result.end_cycle = std::max(result.end_cycle, n.last_commit());
      for (const auto& rec : n.sync_log()) result.syncs.push_back({n.id(), rec});
      if (n.flag_overruns()) result.flag_overruns[n.id()] = n.flag_overruns();
    }
    result.runtime_ns = static_cast<double>(result.end_cycle) * config_.cycle_ns;
    result.windows = qubit_windows(result.traces, config_.cycle_ns, config_.durations);
    return result;
  }

 private:
  void push(fabric::Message msg) {
    msg.seq = seq_++;
    if (fabric::is_router(msg.dst)) {
      router_q_.insert(msg);
    } else {
      node_q_.insert(msg);
    }
  }

  void route_phase(Cycle g) {
    while (!router_q_.empty() && router_q_.begin()->arrival <= g) {
      fabric::Message msg = *router_q_.begin();
      router_q_.erase(router_q_.begin());
      for (auto& m : fabric::route_step(routers_.at(msg.dst), msg, g, config_.topology)) push(m);
    }
  }

  void deliver_phase(Cycle g) {
    while (!node_q_.empty() && node_q_.begin()->arrival <= g) {
      fabric::Message msg = *node_q_.begin();
      node_q_.erase(node_q_.begin());
      node_for(msg.dst).deliver(msg, g);
    }
  }

  node::Controller& node_for(int id) {
    for (auto& n : nodes_) {
      if (n.id() == id) return n;
    }
    throw Error(ErrorKind::kRuntime, "message to unknown controller " + std::to_string(id));
  }

  void absorb(node::Outbox& out, ShotResult& result) {
    for (auto& m : out.messages) push(m);
    // captures are appended in commit order by tcu_tick
    std::size_t ci = 0;
    for (const auto& rec : out.commits) {
      const auto& cfg = config_.topology.controllers.at(rec.node);
      if (!cfg.capture_ports.count(rec.port)) continue;
      const auto& cap = out.captures.at(ci++);
      if (config_.mode == Mode::kBisp) {
        fabric::Message d;
        d.kind = fabric::MsgKind::kDatum;
        d.src = rec.node;
        d.from = rec.node;
        d.dst = rec.node;
        d.sent = rec.cycle;
        d.arrival = cap.ready;
        d.value = cap.value;
        push(d);
      } else {
        for (const auto& [id, unused] : config_.topology.controllers) {
          fabric::Message d;
          d.kind = fabric::MsgKind::kDatum;
          d.src = isa::kCentralAddr;
          d.from = isa::kCentralAddr;
          d.dst = id;
          d.sent = cap.ready;
          d.arrival = cap.ready + config_.topology.lockstep_latency;
          d.value = cap.value;
          push(d);
        }
      }
    }
    for (auto& c : out.commits) result.traces.push_back(std::move(c));
  }

  Cycle next_cycle(Cycle g) {
    bool any_runnable = std::any_of(nodes_.begin(), nodes_.end(), [](const auto& n) { return n.runnable(); });
    if (any_runnable) return g + 1;
    std::optional<Cycle> next;
    auto consider = [&](Cycle c) {
      if (!next || c < *next) next = c;
    };
    if (!router_q_.empty()) consider(router_q_.begin()->arrival);
    if (!node_q_.empty()) consider(node_q_.begin()->arrival);
    for (const auto& n : nodes_) {
      if (auto c = n.next_tcu_activity(g)) consider(*c);
    }
    if (!next) deadlock(g);
    if (!config_.fast_forward) return g + 1;
    Cycle target = std::max(g + 1, *next);
    if (target > g + 1) {
      for (auto& n : nodes_) n.idle(target - g - 1);
    }
    return target;
  }

  [[noreturn]] void deadlock(Cycle g) {
    std::ostringstream msg;
    msg << "deadlock at cycle " << g << ":";
    for (const auto& n : nodes_) {
      if (n.done()) continue;
      msg << " [controller " << n.id() << " pc " << n.pc() << " " << node::to_string(n.stall())
          << (n.paused() ? " tcu-paused" : "") << "]";
    }
    throw Error(ErrorKind::kDeadlock, msg.str());
  }

  const SimConfig& config_;
  int shot_;
  std::vector<node::Controller> nodes_;
  std::map<int, fabric::RouterState> routers_;
  MessageQueue router_q_;
  MessageQueue node_q_;
  std::uint64_t seq_ = 0;
};

}  // namespace

std::string_view to_string(Mode mode) { return mode == Mode::kBisp ? "bisp" : "lockstep"; }

Mode mode_from_string(std::string_view text) {
  if (text == "bisp") return Mode::kBisp;
  if (text == "lockstep") return Mode::kLockstep;
  throw Error(ErrorKind::kConfig, "unknown mode '" + std::string(text) + "'");
}

int OutcomeSource::outcome(int node, int port, std::uint64_t index, std::uint64_t shot) const {
  if (auto it = fixed.find({node, port}); it != fixed.end()) {
    return index < it->second.size() ? it->second[index] : 0;
  }
  if (!random) return 0;
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(node));
  h = splitmix64(h ^ static_cast<std::uint64_t>(port));
  h = splitmix64(h ^ index);
  h = splitmix64(h ^ shot);
  double u = static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
  return u < p_one ? 1 : 0;
}

double RunResult::mean_runtime_ns() const {
  if (shots.empty()) return 0;
  double sum = 0;
  for (const auto& s : shots) sum += s.runtime_ns;
  return sum / static_cast<double>(shots.size());
}

RunResult run(const SimConfig& config) {
  config.topology.validate();
  if (config.cycle_ns <= 0) throw Error(ErrorKind::kConfig, "cycle period must be positive");
  if (config.shots < 1) throw Error(ErrorKind::kConfig, "shot count must be >= 1");
  if (config.start_lead < 0) throw Error(ErrorKind::kConfig, "start lead must be >= 0");
  for (const auto& [id, program] : config.programs) {
    if (!config.topology.controllers.count(id)) {
      throw Error(ErrorKind::kConfig, "program for unknown controller " + std::to_string(id));
    }
  }
  RunResult result;
  result.mode = config.mode;
  result.cycle_ns = config.cycle_ns;
  result.config_hash = config_hash(config);
  for (int shot = 0; shot < config.shots; ++shot) {
    result.shots.push_back(Engine(config, shot).run());
  }
  return result;
}

std::uint64_t config_hash(const SimConfig& config) {
  std::ostringstream s;
  s << "mode=" << to_string(config.mode) << ";ns=" << config.cycle_ns << ";shots=" << config.shots
    << ";cap=" << config.cycle_cap << ";lead=" << config.start_lead
    << ";dur=" << config.durations.single_ns << "," << config.durations.two_qubit_ns << ","
    << config.durations.measure_ns << ";";
  const auto& t = config.topology;
  s << "rd=" << t.router_delay << ";ls=" << t.lockstep_latency << ";";
  for (const auto& [id, c] : t.controllers) {
    s << "c" << id << ":" << c.ports << "," << c.capture_latency << "," << c.output_delay << ","
      << c.queue_depth << "," << c.sync_queue_depth << "," << c.pipeline_ratio << ","
      << c.recv_anchor << "," << c.memory_bytes << "[";
    for (int p : c.capture_ports) s << p << " ";
    s << "];";
  }
  for (int r : t.routers) s << "r" << r << ";";
  for (const auto& [child, e] : t.parent) s << "e" << child << ">" << e.parent << ":" << e.up << "/" << e.down << ";";
  for (const auto& [k, n] : t.mesh) s << "m" << k.first << "-" << k.second << ":" << n << ";";
  for (const auto& [r, members] : t.sync_groups) {
    s << "g" << r << ":";
    for (int m : members) s << m << " ";
    s << ";";
  }
  const auto& o = config.outcomes;
  s << "rand=" << o.random << "," << o.seed << "," << o.p_one << ";";
  for (const auto& [k, bits] : o.fixed) {
    s << "f" << k.first << "." << k.second << ":";
    for (int b : bits) s << b;
    s << ";";
  }
  for (const auto& [id, p] : config.programs) s << "p" << id << "\n" << isa::disassemble(p);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s.str()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace dhisq::sim
