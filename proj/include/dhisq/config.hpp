#pragma once

// JSON configuration files: topology, qubit mapping and benchmark specs.
//
// topology:
//   { "router_delay": 1, "lockstep_latency": 32, "routers": [256],
//     "controllers": [ { "id": 0, "parent": 256, "up": 8, "down": 8,
//                        "capture_ports": [2], ... NodeConfig fields } ],
//     "router_edges": [ { "child": 257, "parent": 256, "up": 8, "down": 8 } ],
//     "mesh": [ [0, 1, 4] ], "sync_groups": { "256": [0, 1] } }
// mapping:
//   { "qubits": { "q0": { "controller": 0, "drive": 0, "flux": 1, "measure": 2 } },
//     "codewords": { "h": 1 }, "overrides": { "cx@q0,q1": 20 } }

#include <filesystem>
#include <string>
#include <string_view>

#include "dhisq/bench.hpp"
#include "dhisq/dqcc.hpp"
#include "dhisq/fabric.hpp"
#include "json.hpp"

namespace dhisq::config {

using Json = nlohmann::json;

/// All parsers throw Error(kConfig) on a malformed or inconsistent document.
fabric::Topology topology_from_json(const Json& j);
Json topology_to_json(const fabric::Topology& topo);

dqcc::MappingConfig mapping_from_json(const Json& j);
Json mapping_to_json(const dqcc::MappingConfig& mapping);

bench::BenchmarkSpec spec_from_json(const Json& j);

/// Error(kIo) when the file cannot be read, Error(kConfig) when it is not JSON.
Json read_json(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace dhisq::config
