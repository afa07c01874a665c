#include <random>

#include "dhisq/error.hpp"
#include "dhisq/node.hpp"
#include "dhisq/sim.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace dhisq;
using namespace dhisq::node;

namespace {

fabric::Topology solo() {
  fabric::Topology t;
  t.controllers[0] = NodeConfig{};
  return t;
}

fabric::Topology pair(int n) {
  fabric::Topology t;
  t.controllers[0] = NodeConfig{};
  t.controllers[1] = NodeConfig{};
  int r = fabric::router_addr(0);
  t.routers = {r};
  t.parent[0] = {r, 2, 2};
  t.parent[1] = {r, 2, 2};
  t.add_mesh(0, 1, n);
  return t;
}

// Drives one controller with no fabric until it halts.
Controller run_solo(const std::string& text, NodeConfig cfg = {}) {
  static fabric::Topology topo = solo();
  Controller c(0, cfg, isa::assemble(text), &topo, nullptr);
  c.start_at(0);
  Outbox out;
  for (Cycle g = 0; !c.done() && g < 100000; ++g) {
    c.tcu_tick(g, out);
    c.step_pipeline(g, out);
  }
  return c;
}

sim::ShotResult run(const fabric::Topology& topo, std::map<int, std::string> programs) {
  sim::SimConfig cfg;
  cfg.topology = topo;
  for (auto& [id, text] : programs) cfg.programs[id] = isa::assemble(text);
  return sim::run(cfg).shots.at(0);
}

}  // namespace

TEST_CASE("waiti only advances the timeline") {
  auto c = run_solo("waiti 100\nwaiti 30");
  CHECK(c.timeline() == 130);
  CHECK(c.last_commit() == -1);
}

TEST_CASE("cw enqueues at the timeline and commits at that cycle") {
  fabric::Topology topo = solo();
  Controller c(0, NodeConfig{}, isa::assemble("waiti 130\ncw.i.i 2, 7"), &topo, nullptr);
  Outbox out;
  c.step_pipeline(0, out);
  c.step_pipeline(1, out);
  CHECK(c.queued_events() == 1);
  for (Cycle g = 0; g <= 130; ++g) c.tcu_tick(g, out);
  REQUIRE(out.commits.size() == 1);
  CHECK(out.commits[0].cycle == 130);
  CHECK(out.commits[0].port == 2);
  CHECK(out.commits[0].codeword == 7);
}

TEST_CASE("waitr adds a register to the timeline") {
  auto c = run_solo("addi r1, r0, 55\nwaitr r1");
  CHECK(c.timeline() == 55);
}

TEST_CASE("two ports with equal stamps commit in the same cycle") {
  auto shot = run(solo(), {{0, "waiti 10\ncw.i.i 0, 1\ncw.i.i 3, 2"}});
  REQUIRE(shot.traces.size() == 2);
  CHECK(shot.traces[0].cycle == 10);
  CHECK(shot.traces[1].cycle == 10);
}

TEST_CASE("register zero stays zero") {
  auto c = run_solo("addi r0, r0, 5\nlui r0, 3\nadd r1, r0, r0");
  CHECK(c.reg(0) == 0);
  CHECK(c.reg(1) == 0);
}

TEST_CASE("memory is little-endian and bounds-checked") {
  auto c = run_solo("li r1, 0x123\nsw r1, 4(r0)\nlbu r2, 4(r0)\nlh r3, 4(r0)\nlb r4, 5(r0)");
  CHECK(c.reg(2) == 0x23);
  CHECK(c.reg(3) == 0x123);
  CHECK(c.reg(4) == 1);
  CHECK_THROWS_AS(run_solo("lw r1, 2047(r0)", NodeConfig{.memory_bytes = 64}), Error);
}

TEST_CASE("jal and jalr link with byte addresses") {
  auto c = run_solo("jal r1, f\naddi r5, r0, 1\nj end\nf:\njalr r0, 0(r1)\nend:");
  CHECK(c.reg(1) == 4);
  CHECK(c.reg(5) == 1);
}

TEST_CASE("issuing behind the timer is a timing violation") {
  // the pipeline reaches cw at cycle 3 while the timeline is still 0
  CHECK_THROWS_WITH_AS(run_solo("addi r1, r0, 1\naddi r1, r0, 1\naddi r1, r0, 1\ncw.i.i 0, 1"),
                       doctest::Contains("timing violation"), Error);
}

TEST_CASE("port out of range faults") {
  CHECK_THROWS_AS(run_solo("waiti 5\ncw.i.i 9, 1"), Error);
}

TEST_CASE("full event queue stalls the pipeline") {
  NodeConfig cfg;
  cfg.queue_depth = 2;
  fabric::Topology topo = solo();
  Controller c(0, cfg, isa::assemble("waiti 50\ncw.i.i 0, 1\ncw.i.i 0, 2\nwaiti 10\ncw.i.i 0, 3"), &topo, nullptr);
  Outbox out;
  for (Cycle g = 0; g < 5; ++g) c.step_pipeline(g, out);
  CHECK(c.stall() == Stall::kQueueFull);
  CHECK(c.queued_events() == 2);
  for (Cycle g = 0; g <= 50; ++g) c.tcu_tick(g, out);
  c.step_pipeline(51, out);
  CHECK(c.stall() == Stall::kNone);
}

TEST_CASE("symmetric nearby sync resumes both sides together") {
  // both book at local 100, N = 10
  auto shot = run(pair(10), {{0, "waiti 100\nsync 1\ncw.i.i 0, 1"}, {1, "waiti 100\nsync 0\ncw.i.i 0, 1"}});
  REQUIRE(shot.traces.size() == 2);
  CHECK(shot.traces[0].cycle == 110);
  CHECK(shot.traces[1].cycle == 110);
  REQUIRE(shot.syncs.size() == 2);
  for (const auto& s : shot.syncs) CHECK(s.record.resolved == 110);
}

TEST_CASE("the later booking decides the nearby sync point") {
  auto shot = run(pair(12), {{0, "waiti 40\nsync 1\ncw.i.i 0, 1"}, {1, "waiti 90\nsync 0\ncw.i.i 0, 1"}});
  CHECK(shot.traces[0].cycle == 102);
  CHECK(shot.traces[1].cycle == 102);
}

TEST_CASE("events stamped before the sync point still commit during the pause") {
  auto shot = run(pair(5), {{0, "waiti 10\ncw.i.i 1, 9\nwaiti 10\nsync 1\ncw.i.i 0, 1"},
                            {1, "waiti 200\nsync 0\ncw.i.i 0, 1"}});
  REQUIRE(shot.traces.size() == 3);
  CHECK(shot.traces[0].cycle == 10);
  CHECK(shot.traces[1].cycle == 205);
  CHECK(shot.traces[2].cycle == 205);
}

TEST_CASE("sync to a non-neighbor faults") {
  auto t = pair(5);
  t.mesh.clear();
  CHECK_THROWS_WITH_AS(run(t, {{0, "waiti 5\nsync 1"}, {1, "waiti 5\nsync 0"}}),
                       doctest::Contains("not a mesh neighbor"), Error);
}

TEST_CASE("a second pulse before consumption counts as an overrun") {
  fabric::Topology topo = pair(3);
  Controller c(1, NodeConfig{}, isa::Program{}, &topo, nullptr);
  fabric::Message pulse;
  pulse.kind = fabric::MsgKind::kSyncPulse;
  pulse.src = 0;
  c.deliver(pulse, 0);
  CHECK(c.flag_overruns() == 0);
  c.deliver(pulse, 1);
  CHECK(c.flag_overruns() == 1);
}

TEST_CASE("sync with no partner is a deadlock with diagnostics") {
  try {
    run(pair(3), {{0, "waiti 10\nsync 1\ncw.i.i 0, 1"}, {1, "waiti 10"}});
    FAIL("expected deadlock");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDeadlock);
    CHECK(std::string(e.what()).find("controller 0") != std::string::npos);
  }
}

TEST_CASE("remote sync: three nodes resume at the max proposal") {
  fabric::Topology t;
  int r = fabric::router_addr(0);
  t.routers = {r};
  for (int i = 0; i < 3; ++i) {
    t.controllers[i] = NodeConfig{};
    t.parent[i] = {r, 1, 1};
  }
  auto shot = run(t, {{0, "waiti 50\nsync 256\ncw.i.i 0, 1"},
                      {1, "waiti 60\nsync 256\ncw.i.i 0, 1"},
                      {2, "waiti 70\nsync 256\ncw.i.i 0, 1"}});
  REQUIRE(shot.traces.size() == 3);
  for (const auto& rec : shot.traces) CHECK(rec.cycle == 70);
  auto events = sim::sync_overhead(shot.syncs, t);
  REQUIRE(events.size() == 1);
  CHECK(events[0].overhead == 0);
  CHECK(events[0].simultaneous);
}

TEST_CASE("remote sync with a single participant resumes at its own proposal") {
  fabric::Topology t;
  int r = fabric::router_addr(0);
  t.routers = {r};
  t.controllers[0] = NodeConfig{};
  t.controllers[1] = NodeConfig{};
  t.parent[0] = {r, 1, 1};
  t.parent[1] = {r, 1, 1};
  t.sync_groups[r] = {1};
  auto shot = run(t, {{1, "waiti 40\nsync 256\ncw.i.i 0, 1"}});
  REQUIRE(shot.traces.size() == 1);
  CHECK(shot.traces[0].cycle == 40);
}

TEST_CASE("remote sync to a foreign router faults") {
  auto t = pair(5);
  t.routers.insert(fabric::router_addr(1));
  t.parent[fabric::router_addr(1)] = {fabric::router_addr(0), 1, 1};
  CHECK_THROWS_WITH_AS(run(t, {{0, "waiti 5\nsync 257"}}), doctest::Contains("not an ancestor"), Error);
}

TEST_CASE("send then recv between neighbors") {
  auto shot = run(pair(40), {{0, "addi r1, r0, 1\nsend 1, r1"},
                            {1, "recv r2, 0\nbeqz r2, skip\ncw.i.i 0, 7\nskip:\ncw.i.i 1, 1"}});
  REQUIRE(shot.traces.size() == 2);
  CHECK(shot.traces[0].codeword == 7);
  // datum sent at global -15, arrives at 25; recv anchors the timeline 8 later
  CHECK(shot.traces[0].cycle == 25 + 8);
}

TEST_CASE("recv stalls exactly until the datum arrives") {
  fabric::Topology topo = pair(5);
  Controller c(1, NodeConfig{}, isa::assemble("recv r2, 0\naddi r3, r0, 1"), &topo, nullptr);
  c.start_at(0);
  Outbox out;
  int stalled = 0;
  fabric::Message d;
  d.kind = fabric::MsgKind::kDatum;
  d.src = 0;
  d.dst = 1;
  d.arrival = 7;
  d.value = 42;
  for (Cycle g = 0; g < 10; ++g) {
    if (g == 7) c.deliver(d, g);
    c.tcu_tick(g, out);
    c.step_pipeline(g, out);
    if (c.stall() == Stall::kRecvWait) ++stalled;
  }
  CHECK(stalled == 7);
  CHECK(c.reg(2) == 42);
  CHECK(c.reg(3) == 1);
}

TEST_CASE("captures deposit the injected outcome for recv") {
  fabric::Topology t = solo();
  t.controllers[0].capture_ports = {3};
  sim::SimConfig cfg;
  cfg.topology = t;
  cfg.outcomes.fixed[{0, 3}] = {1, 0};
  cfg.programs[0] = isa::assemble(
      "waiti 10\ncw.i.i 3, 1\nwaiti 1\ncw.i.i 3, 1\nrecv r1, 0\nrecv r2, 0\nrecv r3, 0");
  // third recv never gets data
  CHECK_THROWS_AS(sim::run(cfg), Error);
  cfg.programs[0] = isa::assemble("waiti 10\ncw.i.i 3, 1\nwaiti 1\ncw.i.i 3, 1\nrecv r1, 0\nrecv r2, 0\n"
                                  "slli r2, r2, 1\nor r1, r1, r2\ncw.r.r r0, r1");
  auto shot = sim::run(cfg).shots[0];
  REQUIRE(shot.traces.size() == 3);
  CHECK(shot.traces[2].codeword == 1);
  // second capture ready at 11 + 75, anchor +8
  CHECK(shot.traces[2].cycle == 11 + 75 + 8);
}

TEST_CASE("property: nearby sync closed form and role swap") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    int n = std::uniform_int_distribution<int>(1, 40)(rng);
    int a = std::uniform_int_distribution<int>(0, 300)(rng);
    int b = std::uniform_int_distribution<int>(0, 300)(rng);
    auto text = [](int book, int peer) {
      return "waiti " + std::to_string(book) + "\nsync " + std::to_string(peer) + "\ncw.i.i 0, 1";
    };
    auto shot = run(pair(n), {{0, text(a, 1)}, {1, text(b, 0)}});
    auto swapped = run(pair(n), {{0, text(b, 1)}, {1, text(a, 0)}});
    Cycle expect = oracle::nearby_resume(a, b, n);
    REQUIRE(shot.traces.size() == 2);
    CHECK(shot.traces[0].cycle == expect);
    CHECK(shot.traces[1].cycle == expect);
    CHECK(swapped.traces[0].cycle == expect);
    CHECK(swapped.traces[1].cycle == expect);
  }
}
