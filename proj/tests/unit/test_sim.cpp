#include <cmath>
#include <random>

#include "dhisq/error.hpp"
#include "dhisq/sim.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace dhisq;
using namespace dhisq::sim;

namespace {

fabric::Topology star(int leaves, int up = 1, int down = 1) {
  fabric::Topology t;
  int r = fabric::router_addr(0);
  t.routers = {r};
  for (int i = 0; i < leaves; ++i) {
    t.controllers[i] = NodeConfig{};
    t.parent[i] = {r, up, down};
  }
  return t;
}

SimConfig config_for(const fabric::Topology& t, std::map<int, std::string> programs) {
  SimConfig cfg;
  cfg.topology = t;
  for (auto& [id, text] : programs) cfg.programs[id] = isa::assemble(text);
  return cfg;
}

// waiti X, k filler instructions, then a region sync and a marker event.
// B = -lead + k + 1, T = max(X, B) as long as nothing paused earlier.
std::string booking_program(int x, int k, int router) {
  std::string s = "waiti " + std::to_string(x) + "\n";
  for (int i = 0; i < k; ++i) s += "addi r1, r1, 1\n";
  s += "sync " + std::to_string(router) + "\ncw.i.i 0, 1\n";
  return s;
}

}  // namespace

TEST_CASE("single node: waiti 10 then cw gives one record at cycle 10") {
  auto r = run(config_for(star(1), {{0, "waiti 10\ncw.i.i 0, 1"}}));
  REQUIRE(r.shots[0].traces.size() == 1);
  CHECK(r.shots[0].traces[0].cycle == 10);
  CHECK(r.shots[0].runtime_ns == doctest::Approx(40));
}

TEST_CASE("idle time is fast-forwarded without changing results") {
  auto cfg = config_for(star(1), {{0, "waiti 1000000\ncw.i.i 0, 1\nwaiti 5\ncw.i.i 1, 2"}});
  auto fast = run(cfg);
  cfg.fast_forward = false;
  auto slow = run(cfg);
  CHECK(fast.shots[0].traces == slow.shots[0].traces);
  CHECK(fast.shots[0].traces[1].cycle == 1000005);
}

TEST_CASE("cycle cap") {
  auto cfg = config_for(star(1), {{0, "loop:\nj loop"}});
  cfg.cycle_cap = 1000;
  CHECK_THROWS_AS(run(cfg), Error);
}

TEST_CASE("config validation") {
  auto cfg = config_for(star(1), {{3, "waiti 1"}});
  CHECK_THROWS_AS(run(cfg), Error);
  cfg = config_for(star(1), {});
  cfg.cycle_ns = 0;
  CHECK_THROWS_AS(run(cfg), Error);
}

TEST_CASE("output delay shifts committed records") {
  auto t = star(1);
  t.controllers[0].output_delay = 57;
  auto r = run(config_for(t, {{0, "waiti 3\ncw.i.i 0, 1"}}));
  CHECK(r.shots[0].traces[0].cycle == 60);
}

TEST_CASE("TELF: empty trace is header only") {
  std::string text = emit_telf({}, 4.0, 0xabc);
  CHECK(text == "# telf 1 config_hash=0000000000000abc cycle_ns=4\ncycle,time_ns,node,port,codeword,label\n");
  auto parsed = parse_telf(text);
  CHECK(parsed.hash == 0xabc);
  CHECK(parsed.traces.empty());
}

TEST_CASE("TELF: round trip") {
  std::vector<TraceRecord> t{{10, 0, 1, 7, "x@q0"}, {12, 3, 0, 65535, "cx@q1,q2"},
                             {-3, 1, 2, 0, ""}, {40, 2, 2, 1, "say \"hi\""}};
  for (double ns : {4.0, 2.5, 0.125}) {
    auto text = emit_telf(t, ns, 42);
    auto back = parse_telf(text);
    CHECK(back.traces == t);
    CHECK(back.cycle_ns == ns);
    CHECK(emit_telf(back.traces, back.cycle_ns, back.hash) == text);
  }
  CHECK(emit_telf(t, 2.5, 1).find("12,30,3,0,65535,\"cx@q1,q2\"") != std::string::npos);
  CHECK_THROWS_AS(parse_telf("cycle,time_ns\n"), SyntaxError);
  CHECK_THROWS_AS(parse_telf(""), SyntaxError);
}

TEST_CASE("determinism: identical configs give identical TELF bytes") {
  auto t = star(2);
  t.controllers[0].capture_ports = {1};
  auto cfg = config_for(t, {{0, "waiti 5\ncw.i.i 1, 1\nrecv r1, 0\nsend 1, r1"},
                            {1, "recv r2, 0\ncw.r.r r0, r2"}});
  cfg.outcomes.random = true;
  cfg.outcomes.seed = 99;
  cfg.shots = 4;
  auto a = run(cfg);
  auto b = run(cfg);
  CHECK(a.config_hash == b.config_hash);
  for (int s = 0; s < 4; ++s) {
    CHECK(emit_telf(a.shots[s].traces, 4, a.config_hash) == emit_telf(b.shots[s].traces, 4, b.config_hash));
  }
  cfg.outcomes.seed = 100;
  CHECK(config_hash(cfg) != a.config_hash);
}

TEST_CASE("random outcomes follow the configured probability") {
  OutcomeSource src;
  src.random = true;
  src.p_one = 0.25;
  int ones = 0;
  for (std::uint64_t k = 0; k < 20000; ++k) ones += src.outcome(0, 0, k, 0);
  CHECK(ones / 20000.0 == doctest::Approx(0.25).epsilon(0.05));
  src.fixed[{0, 0}] = {1, 1};
  CHECK(src.outcome(0, 0, 1, 0) == 1);
  CHECK(src.outcome(0, 0, 2, 0) == 0);
}

TEST_CASE("lockstep captures are broadcast from the central controller") {
  auto t = star(2);
  t.controllers[0].capture_ports = {1};
  t.lockstep_latency = 32;
  auto cfg = config_for(t, {{0, "waiti 5\ncw.i.i 1, 1\nrecv r1, 255\ncw.r.r r0, r1"},
                            {1, "recv r1, 255\ncw.r.r r0, r1"}});
  cfg.mode = Mode::kLockstep;
  cfg.outcomes.fixed[{0, 1}] = {1};
  auto shot = run(cfg).shots[0];
  REQUIRE(shot.traces.size() == 3);
  // capture ready at 5 + 75, broadcast arrives 32 later, anchor 8
  CHECK(shot.traces[1].cycle == 5 + 75 + 32 + 8);
  CHECK(shot.traces[2].cycle == shot.traces[1].cycle);
}

TEST_CASE("qubit windows and fidelity") {
  std::vector<TraceRecord> t{{0, 0, 0, 1, "x@q0"}, {10, 0, 1, 1, "cx@q0,q1"}, {20, 0, 2, 1, "measure@q1"},
                             {5, 0, 3, 1, "unlabelled"}};
  Durations d;
  auto w = qubit_windows(t, 4.0, d);
  REQUIRE(w.size() == 2);
  CHECK(w["q0"].start_ns == 0);
  CHECK(w["q0"].end_ns == 80);
  CHECK(w["q1"].start_ns == 40);
  CHECK(w["q1"].end_ns == 380);
  CHECK(estimate_infidelity({}, 1e-4, 1e-4) == 0);
  std::map<std::string, Window> one{{"q", {0, 1e5}}};  // 100 us
  CHECK(estimate_infidelity(one, 1e-4, 1e-4) == doctest::Approx(1 - std::exp(-1.0)));
  CHECK_THROWS_AS(estimate_fidelity(one, 0, 1), Error);
}

TEST_CASE("overhead: late uplink with zero downlink equals L2 - D2") {
  auto t = star(3, 1, 0);
  t.router_delay = 0;
  t.parent[2].up = 30;
  // node 2 books at -15 with T = 5, so D2 = 20 < L2 = 30
  auto cfg = config_for(t, {{0, booking_program(0, 0, 256)}, {1, booking_program(0, 0, 256)},
                            {2, booking_program(5, 0, 256)}});
  auto shot = run(cfg).shots[0];
  auto ev = sync_overhead(shot.syncs, t);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].overhead == 30 - 20);
  CHECK(ev[0].simultaneous);
}

TEST_CASE("property: remote sync matches the hop-by-hop oracle on random trees") {
  std::mt19937 rng(1234);
  for (int trial = 0; trial < 60; ++trial) {
    oracle::TreeSpec spec;
    spec.levels = std::uniform_int_distribution<int>(1, 3)(rng);
    spec.leaves = std::uniform_int_distribution<int>(2, 10)(rng);
    auto t = oracle::random_tree(rng, spec);
    int root = t.root();
    SimConfig cfg;
    cfg.topology = t;
    for (const auto& [id, unused] : t.controllers) {
      int x = std::uniform_int_distribution<int>(0, 120)(rng);
      int k = std::uniform_int_distribution<int>(0, 60)(rng);
      cfg.programs[id] = isa::assemble(booking_program(x, k, root));
    }
    auto shot = run(cfg).shots[0];
    std::map<int, oracle::Proposal> props;
    for (const auto& e : shot.syncs) props[e.node] = {e.record.booked, e.record.proposed};
    auto expect = oracle::remote_resume(t, root, props);
    for (const auto& e : shot.syncs) CHECK(e.record.resolved == expect.resume);
    for (const auto& r : shot.traces) CHECK(r.cycle == expect.resume);
  }
}

TEST_CASE("property: shrinking a booking margin never reduces overhead") {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 40; ++trial) {
    auto t = star(3, std::uniform_int_distribution<int>(1, 20)(rng), 2);
    int x[3], k[3];
    for (int i = 0; i < 3; ++i) {
      x[i] = std::uniform_int_distribution<int>(0, 60)(rng);
      k[i] = std::uniform_int_distribution<int>(0, 30)(rng);
    }
    Cycle prev = -1;
    for (int extra = 0; extra < 40; extra += 5) {  // later booking of node 0
      auto cfg = config_for(t, {{0, booking_program(x[0], k[0] + extra, 256)},
                                {1, booking_program(x[1], k[1], 256)},
                                {2, booking_program(x[2], k[2], 256)}});
      auto ev = sync_overhead(run(cfg).shots[0].syncs, t);
      REQUIRE(ev.size() == 1);
      // T moves with the booking once B passes X, so compare against the fixed proposals
      Cycle maxt = std::max({x[0], x[1], x[2]});
      Cycle over = ev[0].resolved - maxt;
      CHECK(over >= prev);
      prev = over;
    }
  }
}

TEST_CASE("unmatched sync records are reported") {
  node::SyncRecord r;
  r.mode = node::SyncMode::kNearby;
  r.target = 1;
  CHECK_THROWS_AS(sync_overhead({{0, r}}, star(2)), Error);
}
