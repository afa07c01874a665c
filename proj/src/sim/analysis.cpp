#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "dhisq/error.hpp"
#include "dhisq/sim.hpp"

namespace dhisq::sim {

std::map<std::string, Window> qubit_windows(const std::vector<TraceRecord>& traces,
                                            double cycle_ns, const Durations& durations) {
  std::map<std::string, Window> windows;
  for (const auto& r : traces) {
    auto at = r.label.find('@');
    if (at == std::string::npos) continue;
    std::string gate = r.label.substr(0, at);
    std::vector<std::string> qubits;
    std::string rest = r.label.substr(at + 1);
    std::size_t start = 0;
    while (start <= rest.size()) {
      std::size_t comma = rest.find(',', start);
      if (comma == std::string::npos) comma = rest.size();
      if (comma > start) qubits.push_back(rest.substr(start, comma - start));
      start = comma + 1;
    }
    double duration = gate == "measure" ? durations.measure_ns
                      : qubits.size() >= 2 ? durations.two_qubit_ns
                                           : durations.single_ns;
    double begin = static_cast<double>(r.cycle) * cycle_ns;
    for (const auto& q : qubits) {
      auto [it, fresh] = windows.try_emplace(q, Window{begin, begin + duration});
      if (!fresh) {
        it->second.start_ns = std::min(it->second.start_ns, begin);
        it->second.end_ns = std::max(it->second.end_ns, begin + duration);
      }
    }
  }
  return windows;
}

double estimate_fidelity(const std::map<std::string, Window>& windows, double t1_s, double t2_s) {
  if (t1_s <= 0 || t2_s <= 0) throw Error(ErrorKind::kConfig, "T1 and T2 must be positive");
  double rate = (1.0 / t1_s + 1.0 / t2_s) / 2.0;
  double exponent = 0;
  for (const auto& [q, w] : windows) exponent += (w.end_ns - w.start_ns) * 1e-9 * rate;
  return std::exp(-exponent);
}

double estimate_infidelity(const std::map<std::string, Window>& windows, double t1_s, double t2_s) {
  return 1.0 - estimate_fidelity(windows, t1_s, t2_s);
}

double mean_infidelity(const RunResult& result, double t1_s, double t2_s) {
  if (result.shots.empty()) return 0;
  double sum = 0;
  for (const auto& s : result.shots) sum += estimate_infidelity(s.windows, t1_s, t2_s);
  return sum / static_cast<double>(result.shots.size());
}

std::vector<SyncEvent> sync_overhead(const std::vector<SyncEntry>& syncs,
                                     const fabric::Topology& topology) {
  // key: (remote, target-or-pair, occurrence) -> entries
  struct Key {
    bool remote;
    int a;
    int b;
    std::size_t k;
    bool operator<(const Key& o) const {
      return std::tie(remote, a, b, k) < std::tie(o.remote, o.a, o.b, o.k);
    }
  };
  std::map<Key, std::vector<const SyncEntry*>> groups;
  std::map<std::tuple<int, bool, int>, std::size_t> seen;  // (node, remote, target) -> count
  for (const auto& e : syncs) {
    bool remote = e.record.mode == node::SyncMode::kRemote;
    std::size_t k = seen[{e.node, remote, e.record.target}]++;
    Key key = remote ? Key{true, e.record.target, 0, k}
                     : Key{false, std::min(e.node, e.record.target), std::max(e.node, e.record.target), k};
    groups[key].push_back(&e);
  }
  std::vector<SyncEvent> events;
  for (const auto& [key, members] : groups) {
    SyncEvent ev;
    ev.remote = key.remote;
    ev.target = key.remote ? key.a : key.b;
    std::set<int> who;
    for (const auto* m : members) who.insert(m->node);
    std::set<int> expected;
    if (key.remote) {
      auto p = topology.participants(key.a);
      expected.insert(p.begin(), p.end());
    } else {
      expected = {key.a, key.b};
    }
    if (who != expected || members.size() != expected.size()) {
      throw Error(ErrorKind::kRuntime, "sync event without matching records from every participant");
    }
    ev.participants.assign(who.begin(), who.end());
    bool first = true;
    for (const auto* m : members) {
      Cycle ready = m->record.proposed - m->record.pad;
      if (first) {
        ev.resolved = m->record.resolved;
        ev.max_proposed = ready;
        first = false;
      } else {
        if (m->record.resolved != ev.resolved) ev.simultaneous = false;
        ev.resolved = std::max(ev.resolved, m->record.resolved);
        ev.max_proposed = std::max(ev.max_proposed, ready);
      }
    }
    ev.overhead = std::max<Cycle>(0, ev.resolved - ev.max_proposed);
    events.push_back(std::move(ev));
  }
  std::stable_sort(events.begin(), events.end(), [](const SyncEvent& a, const SyncEvent& b) {
    return std::tie(a.resolved, a.target) < std::tie(b.resolved, b.target);
  });
  return events;
}

}  // namespace dhisq::sim

namespace dhisq::sim {

void write_report(const RunResult& result, const fabric::Topology& topology, std::ostream& out) {
  out << "mode " << to_string(result.mode) << "\n";
  out << "cycle_ns " << result.cycle_ns << "\n";
  out << "config_hash " << std::hex << result.config_hash << std::dec << "\n";
  out << "shots " << result.shots.size() << "\n";
  out << "mean_runtime_ns " << result.mean_runtime_ns() << "\n";
  for (std::size_t i = 0; i < result.shots.size(); ++i) {
    const ShotResult& shot = result.shots[i];
    out << "\nshot " << i << "\n";
    out << "  end_cycle " << shot.end_cycle << "\n";
    out << "  runtime_ns " << shot.runtime_ns << "\n";
    out << "  records " << shot.traces.size() << "\n";
    auto events = sync_overhead(shot.syncs, topology);
    out << "  syncs " << events.size() << "\n";
    for (const auto& e : events) {
      out << "    " << (e.remote ? "remote " : "nearby ") << e.target << " [";
      for (std::size_t k = 0; k < e.participants.size(); ++k) out << (k ? " " : "") << e.participants[k];
      out << "] resolved " << e.resolved << " overhead " << e.overhead
          << (e.simultaneous ? "" : " NOT-SIMULTANEOUS") << "\n";
    }
    out << "  windows " << shot.windows.size() << "\n";
    for (const auto& [q, w] : shot.windows) {
      out << "    " << q << " " << w.start_ns << " " << w.end_ns << "\n";
    }
    for (const auto& [node, n] : shot.flag_overruns) out << "  flag_overruns " << node << " " << n << "\n";
  }
}

}  // namespace dhisq::sim
