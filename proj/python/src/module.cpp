#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "dhisq/bench.hpp"
#include "dhisq/config.hpp"
#include "dhisq/dqcc.hpp"
#include "dhisq/error.hpp"
#include "dhisq/isa.hpp"
#include "dhisq/sim.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace dhisq;

namespace {

py::dict records(const std::vector<sim::TraceRecord>& traces) {
  py::list out;
  for (const auto& r : traces) {
    out.append(py::dict("cycle"_a = r.cycle, "node"_a = r.node, "port"_a = r.port, "codeword"_a = r.codeword,
                        "label"_a = r.label));
  }
  return py::dict("records"_a = out);
}

fabric::Topology topology_arg(const std::string& text) {
  return config::topology_from_json(config::Json::parse(text));
}

py::bytes assemble(const std::string& text) {
  auto bytes = isa::encode(isa::assemble(text));
  return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

std::string disassemble(const py::bytes& data) {
  std::string raw = data;
  return isa::disassemble(isa::decode({reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()}));
}

py::dict compile(const std::string& circuit, const std::string& mode, const std::optional<std::string>& mapping,
                 const std::optional<std::string>& topology) {
  auto ir = dqcc::parse_ir(circuit);
  auto m = mapping ? config::mapping_from_json(config::Json::parse(*mapping)) : dqcc::one_per_controller(ir);
  dqcc::CompileOptions opt;
  opt.mode = sim::mode_from_string(mode);
  if (topology) {
    opt.topology = topology_arg(*topology);
  } else {
    int n = 0;
    for (const auto& [q, p] : m.qubits) n = std::max(n, p.controller + 1);
    opt.topology = bench::ladder_device(n, {}).topology;
  }
  auto c = dqcc::compile(ir, m, opt);
  py::dict programs;
  for (const auto& [id, p] : c.programs) programs[py::int_(id)] = isa::disassemble(p);
  return py::dict("programs"_a = programs, "manifest"_a = c.manifest,
                  "topology"_a = config::topology_to_json(opt.topology).dump());
}

py::dict run(const std::map<int, std::string>& programs, const std::string& topology, const std::string& mode,
             std::uint64_t seed, int shots, Cycle cycle_cap, bool random_outcomes,
             const std::map<int, std::vector<int>>& sync_groups) {
  sim::SimConfig cfg;
  cfg.topology = topology_arg(topology);
  for (const auto& [r, members] : sync_groups) cfg.topology.sync_groups[r] = members;
  for (const auto& [id, text] : programs) cfg.programs[id] = isa::assemble(text);
  cfg.mode = sim::mode_from_string(mode);
  cfg.shots = shots;
  cfg.cycle_cap = cycle_cap;
  cfg.outcomes.random = random_outcomes;
  cfg.outcomes.seed = seed;
  sim::RunResult r;
  {
    py::gil_scoped_release release;
    r = sim::run(cfg);
  }
  py::list shot_list;
  for (const auto& s : r.shots) {
    py::dict d = records(s.traces);
    d["telf"] = sim::emit_telf(s.traces, r.cycle_ns, r.config_hash);
    d["runtime_ns"] = s.runtime_ns;
    d["end_cycle"] = s.end_cycle;
    shot_list.append(d);
  }
  std::ostringstream report;
  sim::write_report(r, cfg.topology, report);
  return py::dict("shots"_a = shot_list, "mean_runtime_ns"_a = r.mean_runtime_ns(),
                  "config_hash"_a = r.config_hash, "report"_a = report.str());
}

py::dict fig10(int iterations, int increment, int link) {
  bench::Fig10Params p;
  p.iterations = iterations;
  p.increment = increment;
  p.link = link;
  auto fig = bench::gen_fig10(p);
  auto r = bench::run_fig10(fig);
  return py::dict("control"_a = fig.control_text, "readout"_a = fig.readout_text,
                  "control_sync_start"_a = r.control_sync_start, "readout_sync_start"_a = r.readout_sync_start,
                  "yellow"_a = r.yellow, "blue"_a = r.blue, "aligned"_a = r.aligned(), "advance"_a = r.advance());
}

std::string bench_csv(const std::optional<std::string>& spec_json, const std::optional<std::vector<std::string>>& benchmarks,
                      std::optional<int> qubits, std::optional<std::uint64_t> seed) {
  auto spec = spec_json ? config::spec_from_json(config::Json::parse(*spec_json)) : bench::default_spec();
  if (benchmarks) spec.benchmarks = *benchmarks;
  if (qubits) spec.qubits = *qubits;
  if (seed) spec.seed = *seed;
  std::vector<bench::ComparisonRow> rows;
  {
    py::gil_scoped_release release;
    rows = bench::run_comparison(spec);
  }
  std::ostringstream out;
  bench::write_csv(rows, out);
  return out.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "HISQ/BISP distributed control simulator";

  static py::exception<Error> error(m, "DhisqError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
      exc.attr("kind") = std::string(to_string(e.kind()));
      exc.attr("code") = static_cast<int>(e.kind());
      PyErr_SetObject(error.ptr(), exc.ptr());
    } catch (const config::Json::exception& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
      exc.attr("kind") = std::string(to_string(ErrorKind::kConfig));
      exc.attr("code") = static_cast<int>(ErrorKind::kConfig);
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  m.def("assemble", &assemble, "text"_a, "Assemble to the flat little-endian binary.");
  m.def("disassemble", &disassemble, "data"_a);
  m.def("canonical", [](const std::string& text) { return isa::disassemble(isa::assemble(text)); }, "text"_a,
        "Reformat assembly text in canonical form.");
  m.def("compile", &compile, "circuit"_a, "mode"_a = "bisp", "mapping"_a = py::none(), "topology"_a = py::none(),
        "Compile circuit IR; mapping and topology are JSON strings.");
  m.def("run", &run, "programs"_a, "topology"_a, "mode"_a = "bisp", "seed"_a = 1, "shots"_a = 1,
        "cycle_cap"_a = 10'000'000, "random_outcomes"_a = false,
        "sync_groups"_a = std::map<int, std::vector<int>>{});
  m.def("fig10", &fig10, "iterations"_a = 8, "increment"_a = 30, "link"_a = 20);
  m.def("bench", &bench_csv, "spec"_a = py::none(), "benchmarks"_a = py::none(), "qubits"_a = py::none(),
        "seed"_a = py::none(), "BISP vs lock-step comparison as CSV text.");
  m.def("long_range_cnot", [](int n) { return dqcc::print_ir(bench::gen_long_range_cnot(n)); }, "n"_a);
  m.def("dynamic_circuit", [](const std::string& family, int qubits, std::uint64_t seed, double p) {
    return dqcc::print_ir(bench::convert_to_dynamic(bench::static_circuit(family, qubits, seed), seed, p));
  }, "family"_a, "qubits"_a = 8, "seed"_a = 1, "p"_a = 0.5);
}
