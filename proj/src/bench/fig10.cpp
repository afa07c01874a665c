#include <algorithm>
#include <sstream>

#include "dhisq/bench.hpp"
#include "dhisq/error.hpp"

namespace dhisq::bench {

namespace {

constexpr int kControl = 0;
constexpr int kReadout = 1;
constexpr int kYellow = 1;
constexpr int kBlue = 2;

}  // namespace

Fig10 gen_fig10(const Fig10Params& p) {
  if (p.iterations < 1 || p.increment < 0 || p.link < 1 || p.setup < 0 || p.gap < 1 || p.tail < 0 ||
      p.trigger_skew < 0) {
    throw Error(ErrorKind::kConfig, "fig10: invalid loop parameters");
  }
  Fig10 f;
  f.params = p;

  // Both boards spend the same time from resumption to their next booking,
  // so the only drift between them is the waitr increment.
  std::ostringstream c;
  c << ".node 0\n"
    << "  addi r1, r0, 0\n"
    << "  addi r2, r0, 0\n"
    << "  addi r3, r0, " << p.iterations << "\n"
    << "loop:\n"
    << "  waitr r1\n"
    << "  cw.i.i 0, 1  # @marker\n"
    << "  sync 1\n"
    << "  waiti " << p.setup << "\n"
    << "  cw.i.i 1, 1  # @yellow\n"
    << "  waiti " << p.gap << "\n"
    << "  cw.i.i 2, 1  # @blue\n"
    << "  waiti " << p.tail + p.trigger_skew << "\n"
    << "  addi r1, r1, " << p.increment << "\n"
    << "  addi r2, r2, 1\n"
    << "  bne r2, r3, loop\n";
  std::ostringstream r;
  r << ".node 1\n"
    << "  addi r2, r0, 0\n"
    << "  addi r3, r0, " << p.iterations << "\n"
    << "loop:\n"
    << "  cw.i.i 0, 1  # @marker\n"
    << "  sync 0\n"
    << "  waiti " << p.setup << "\n"
    << "  waiti " << p.trigger_skew << "\n"
    << "  cw.i.i 1, 1  # @yellow\n"
    << "  waiti " << p.gap << "\n"
    << "  cw.i.i 2, 1  # @blue\n"
    << "  waiti " << p.tail << "\n"
    << "  addi r2, r2, 1\n"
    << "  bne r2, r3, loop\n";
  f.control_text = c.str();
  f.readout_text = r.str();
  f.control = isa::assemble(f.control_text);
  f.readout = isa::assemble(f.readout_text);

  int router = fabric::router_addr(0);
  f.topology.routers = {router};
  for (int id : {kControl, kReadout}) {
    NodeConfig n;
    n.ports = 3;
    f.topology.controllers[id] = n;
    f.topology.parent[id] = {router, 8, 8};
  }
  f.topology.controllers[kControl].output_delay = p.trigger_skew;
  f.topology.add_mesh(kControl, kReadout, p.link);
  return f;
}

bool Fig10Result::aligned() const {
  if (yellow.empty() || yellow.size() != blue.size()) return false;
  for (std::size_t i = 0; i < yellow.size(); ++i) {
    if (yellow[i].first != yellow[i].second || blue[i].first != blue[i].second) return false;
  }
  return true;
}

std::vector<Cycle> Fig10Result::advance() const {
  std::vector<Cycle> out;
  std::size_t n = std::min(control_sync_start.size(), readout_sync_start.size());
  for (std::size_t i = 1; i < n; ++i) {
    Cycle before = control_sync_start[i - 1] - readout_sync_start[i - 1];
    out.push_back(control_sync_start[i] - readout_sync_start[i] - before);
  }
  return out;
}

Fig10Result run_fig10(const Fig10& fig, double cycle_ns) {
  sim::SimConfig cfg;
  cfg.topology = fig.topology;
  cfg.programs = {{kControl, fig.control}, {kReadout, fig.readout}};
  cfg.cycle_ns = cycle_ns;
  Fig10Result out;
  out.run = sim::run(cfg);
  const auto& shot = out.run.shots.at(0);
  for (const auto& s : shot.syncs) {
    (s.node == kControl ? out.control_sync_start : out.readout_sync_start).push_back(s.record.booked);
  }
  std::vector<Cycle> yc, yr, bc, br;
  for (const auto& t : shot.traces) {
    if (t.port == kYellow) (t.node == kControl ? yc : yr).push_back(t.cycle);
    if (t.port == kBlue) (t.node == kControl ? bc : br).push_back(t.cycle);
  }
  for (std::size_t i = 0; i < std::min(yc.size(), yr.size()); ++i) out.yellow.push_back({yc[i], yr[i]});
  for (std::size_t i = 0; i < std::min(bc.size(), br.size()); ++i) out.blue.push_back({bc[i], br[i]});
  return out;
}

}  // namespace dhisq::bench
