#include <functional>

#include "dhisq/bench.hpp"
#include "dhisq/config.hpp"
#include "dhisq/error.hpp"
#include "doctest.h"

using namespace dhisq;
using config::Json;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::kRuntime;
}

}  // namespace

TEST_CASE("topology survives a JSON round trip") {
  auto dev = bench::ladder_device(4, {});
  dev.topology.controllers[2].output_delay = 9;
  dev.topology.controllers[3].pipeline_ratio = 2;
  dev.topology.sync_groups[fabric::router_addr(0)] = {1, 2};
  Json j = config::topology_to_json(dev.topology);
  auto back = config::topology_from_json(j);
  CHECK(config::topology_to_json(back) == j);
  CHECK(back.controllers.at(2).output_delay == 9);
  CHECK(back.controllers.at(0).capture_ports == std::set<int>{2, 5});
  CHECK(back.mesh_latency(1, 2) == 4);
  CHECK(back.parent.at(3).up == 8);
}

TEST_CASE("nested routers come from router_edges") {
  Json j = Json::parse(R"({
    "routers": [256, 257],
    "controllers": [ {"id": 0, "parent": 257, "up": 3, "down": 2}, {"id": 1, "parent": 256} ],
    "router_edges": [ {"child": 257, "parent": 256, "up": 4, "down": 4} ]
  })");
  auto t = config::topology_from_json(j);
  CHECK(t.up_path(0, 256) == 3 + 4 + t.router_delay);
  CHECK(t.root() == 256);
}

TEST_CASE("malformed topologies are config errors") {
  CHECK(kind_of([] { config::topology_from_json(Json::parse("[]")); }) == ErrorKind::kConfig);
  CHECK(kind_of([] { config::topology_from_json(Json::parse(R"({"controllers": [{}]})")); }) == ErrorKind::kConfig);
  CHECK(kind_of([] {
          config::topology_from_json(Json::parse(R"({"controllers": [{"id": 0, "ports": "x"}]})"));
        }) == ErrorKind::kConfig);
  CHECK(kind_of([] {
          config::topology_from_json(Json::parse(R"({"controllers": [{"id": 0}, {"id": 0}]})"));
        }) == ErrorKind::kConfig);
  CHECK(kind_of([] {
          config::topology_from_json(Json::parse(R"({"controllers": [{"id": 0}], "mesh": [[0, 1]]})"));
        }) == ErrorKind::kConfig);
}

TEST_CASE("mapping round trip keeps ports and overrides") {
  auto m = bench::ladder_device(2, {}).mapping;
  m.overrides["cx@q0,q1"] = 99;
  auto back = config::mapping_from_json(config::mapping_to_json(m));
  CHECK(back == m);
}

TEST_CASE("mapping defaults the codeword table") {
  auto m = config::mapping_from_json(Json::parse(R"({"qubits": {"q0": {"controller": 3}}})"));
  CHECK(m.qubits.at("q0").controller == 3);
  CHECK(m.qubits.at("q0").measure == 2);
  CHECK(m.codewords == dqcc::default_codewords());
  CHECK(kind_of([] { config::mapping_from_json(Json::parse(R"({"qubits": {"q0": {}}})")); }) ==
        ErrorKind::kConfig);
}

TEST_CASE("benchmark spec overrides defaults field by field") {
  auto s = config::spec_from_json(Json::parse(R"({"qubits": 6, "latencies": {"mesh": 2}, "shots": 3})"));
  auto d = bench::default_spec();
  CHECK(s.qubits == 6);
  CHECK(s.shots == 3);
  CHECK(s.latencies.mesh == 2);
  CHECK(s.latencies.lockstep == d.latencies.lockstep);
  CHECK(s.benchmarks == d.benchmarks);
  CHECK(s.t_grid_us == d.t_grid_us);
  CHECK(kind_of([] { config::spec_from_json(Json::parse(R"({"substitution_p": 2})")); }) == ErrorKind::kConfig);
  CHECK(kind_of([] { config::spec_from_json(Json::parse(R"({"qubits": 2})")); }) == ErrorKind::kConfig);
}

TEST_CASE("file helpers report io and parse failures") {
  CHECK(kind_of([] { config::read_json("/nonexistent/x.json"); }) == ErrorKind::kIo);
  auto path = std::filesystem::temp_directory_path() / "dhisq_config_test.json";
  config::write_text(path, "{ not json");
  CHECK(kind_of([&] { config::read_json(path); }) == ErrorKind::kConfig);
  config::write_text(path, R"({"a": 1})");
  CHECK(config::read_json(path).at("a") == 1);
  std::filesystem::remove(path);
}
