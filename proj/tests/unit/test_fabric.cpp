#include <random>

#include "dhisq/error.hpp"
#include "dhisq/fabric.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace dhisq;
using namespace dhisq::fabric;

namespace {

// root R0 -> R1 -> {0, 1}, root R0 -> 2
Topology two_level() {
  Topology t;
  for (int i = 0; i < 3; ++i) t.controllers[i] = NodeConfig{};
  int r0 = router_addr(0), r1 = router_addr(1);
  t.routers = {r0, r1};
  t.parent[r1] = {r0, 4, 4};
  t.parent[0] = {r1, 3, 2};
  t.parent[1] = {r1, 5, 1};
  t.parent[2] = {r0, 2, 6};
  return t;
}

Message request(int from, int dst, int group, Cycle value) {
  Message m;
  m.kind = MsgKind::kSyncRequest;
  m.src = from;
  m.from = from;
  m.dst = dst;
  m.group = group;
  m.value = value;
  return m;
}

}  // namespace

TEST_CASE("validation accepts a well-formed tree") {
  CHECK_NOTHROW(two_level().validate());
  CHECK(two_level().root() == router_addr(0));
  CHECK(two_level().height() == 2);
}

TEST_CASE("validation rejects degenerate links") {
  auto t = two_level();
  t.mesh[{1, 1}] = 3;
  CHECK_THROWS_AS(t.validate(), Error);

  t = two_level();
  t.mesh[{0, 1}] = 0;
  CHECK_THROWS_AS(t.validate(), Error);

  t = two_level();
  t.parent[0].up = 0;
  CHECK_THROWS_AS(t.validate(), Error);

  t = two_level();
  t.parent.erase(router_addr(1));  // two roots
  CHECK_THROWS_AS(t.validate(), Error);

  t = two_level();
  t.add_mesh(0, 1, 4);
  CHECK_THROWS_AS(t.add_mesh(1, 0, 5), Error);
  CHECK(*t.mesh_latency(1, 0) == 4);
}

TEST_CASE("tree queries") {
  auto t = two_level();
  CHECK(t.lca(0, 1) == router_addr(1));
  CHECK(t.lca(0, 2) == router_addr(0));
  CHECK(t.is_ancestor(router_addr(0), 1));
  CHECK_FALSE(t.is_ancestor(router_addr(1), 2));
  CHECK(t.participants(router_addr(0)) == std::vector<int>{0, 1, 2});
  CHECK(t.participating_children(router_addr(0), router_addr(0)) == std::vector<int>{2, router_addr(1)});
  t.sync_groups[router_addr(0)] = {2, 0};
  CHECK(t.participants(router_addr(0)) == std::vector<int>{0, 2});
  CHECK(t.participating_children(router_addr(1), router_addr(0)) == std::vector<int>{0});
}

TEST_CASE("multi-hop path sums") {
  auto t = two_level();
  t.router_delay = 0;
  CHECK(t.up_path(0, router_addr(0)) == 3 + 4);
  CHECK(t.down_path(router_addr(0), 1) == 4 + 1);
  t.router_delay = 1;
  // up: leaf->R1 (3), R1 processes (1), R1->R0 (4)
  CHECK(t.up_path(0, router_addr(0)) == 8);
  // down: R0 processes (1), R0->R1 (4), R1 processes (1), R1->1 (1)
  CHECK(t.down_path(router_addr(0), 1) == 7);
  // datum 0 -> 2 through the root
  CHECK(t.datum_latency(0, 2) == t.up_path(0, router_addr(0)) + t.down_path(router_addr(0), 2));
  t.add_mesh(0, 2, 9);
  CHECK(t.datum_latency(0, 2) == 9);
  CHECK(t.datum_latency(0, 0) == 0);
  CHECK(t.datum_latency(isa::kCentralAddr, 1) == t.lockstep_latency);
}

TEST_CASE("router takes the max of its children before granting") {
  Topology t;
  int r = router_addr(0);
  t.routers = {r};
  for (int i = 0; i < 3; ++i) {
    t.controllers[i] = NodeConfig{};
    t.parent[i] = {r, 1, 1};
  }
  RouterState state{r, {}, 0};
  CHECK(route_step(state, request(0, r, r, 50), 10, t).empty());
  CHECK(route_step(state, request(1, r, r, 60), 11, t).empty());
  auto out = route_step(state, request(2, r, r, 70), 12, t);
  REQUIRE(out.size() == 3);
  for (const auto& m : out) {
    CHECK(m.kind == MsgKind::kSyncGrant);
    CHECK(m.value == 70);
    CHECK(m.sent == 12);
    CHECK(m.arrival == 12 + t.router_delay + 1);
  }
  CHECK(state.decisions == 1);
}

TEST_CASE("grant from the parent is rebroadcast unchanged") {
  auto t = two_level();
  RouterState r1{router_addr(1), {}, 0};
  Message g;
  g.kind = MsgKind::kSyncGrant;
  g.from = router_addr(0);
  g.dst = router_addr(1);
  g.group = router_addr(0);
  g.value = 1234;
  auto out = route_step(r1, g, 100, t);
  REQUIRE(out.size() == 2);
  CHECK(out[0].value == 1234);
  CHECK(out[1].value == 1234);
  CHECK(out[0].arrival == 100 + t.router_delay + 2);
  CHECK(out[1].arrival == 100 + t.router_delay + 1);
  g.from = 2;
  CHECK_THROWS_AS(route_step(r1, g, 100, t), Error);
}

TEST_CASE("requests from non-participants are rejected") {
  auto t = two_level();
  RouterState r1{router_addr(1), {}, 0};
  CHECK_THROWS_AS(route_step(r1, request(2, router_addr(1), router_addr(1), 5), 0, t), Error);
}

TEST_CASE("clamp_grant") {
  CHECK(clamp_grant(1000, 10, 7) == 1000);
  CHECK(clamp_grant(12, 10, 7) == 17);
}

TEST_CASE("delivery order breaks ties by source then send cycle") {
  Message a, b;
  a.arrival = b.arrival = 5;
  a.src = 1;
  b.src = 2;
  CHECK(delivery_before(a, b));
  b.src = 1;
  a.sent = 3;
  b.sent = 2;
  CHECK(delivery_before(b, a));
}

TEST_CASE("property: grants reach every participant no later than the clamped point") {
  std::mt19937 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    oracle::TreeSpec spec;
    spec.levels = std::uniform_int_distribution<int>(1, 3)(rng);
    spec.leaves = std::uniform_int_distribution<int>(2, 16)(rng);
    Topology t = oracle::random_tree(rng, spec);
    REQUIRE_NOTHROW(t.validate());
    int group = t.root();
    // feed requests through route_step by hand, leaves in random order
    std::map<int, RouterState> routers;
    for (int r : t.routers) routers[r].addr = r;
    std::vector<Message> in_flight;
    std::map<int, oracle::Proposal> props;
    for (int leaf : t.participants(group)) {
      Cycle b = std::uniform_int_distribution<int>(0, 40)(rng);
      Cycle tp = b + std::uniform_int_distribution<int>(0, 40)(rng);
      props[leaf] = {b, tp};
      Message m = request(leaf, t.parent.at(leaf).parent, group, tp);
      m.sent = b;
      m.arrival = b + t.parent.at(leaf).up;
      in_flight.push_back(m);
    }
    std::map<int, Cycle> grant_arrival;
    Cycle granted = -1;
    while (!in_flight.empty()) {
      auto it = std::min_element(in_flight.begin(), in_flight.end(), delivery_before);
      Message m = *it;
      in_flight.erase(it);
      if (!is_router(m.dst)) {
        grant_arrival[m.dst] = m.arrival;
        CHECK((granted < 0 || granted == m.value));
        granted = m.value;
        continue;
      }
      for (auto& out : route_step(routers.at(m.dst), m, m.arrival, t)) {
        CHECK(out.arrival >= out.sent);
        in_flight.push_back(out);
      }
    }
    auto expect = oracle::remote_resume(t, group, props);
    CHECK(granted == expect.resume);
    REQUIRE(grant_arrival.size() == props.size());
    for (const auto& [leaf, at] : grant_arrival) CHECK(at <= granted);
  }
}
