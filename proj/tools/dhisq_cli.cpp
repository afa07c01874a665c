// dhisq command-line front end.
//
//   dhisq assemble prog.s -o prog.bin
//   dhisq disassemble prog.bin
//   dhisq run --topology topo.json node0.s node1.s --telf out.telf
//   dhisq run --manifest build/manifest.json --topology topo.json
//   dhisq compile circuit.qc --mapping map.json --topology topo.json -d out/
//   dhisq bench --spec spec.json -o results.csv
//   dhisq fig10 -d out/
//
// Exit status is 0 on success, otherwise the numeric ErrorKind of the failure.

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "dhisq/bench.hpp"
#include "dhisq/config.hpp"
#include "dhisq/dqcc.hpp"
#include "dhisq/error.hpp"
#include "dhisq/isa.hpp"
#include "dhisq/sim.hpp"

namespace fs = std::filesystem;
using namespace dhisq;

namespace {

bool is_binary_path(const fs::path& p) { return p.extension() == ".bin"; }

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::string text = config::read_text(path);
  return {text.begin(), text.end()};
}

isa::Program load_program(const fs::path& path) {
  if (is_binary_path(path)) return isa::decode(read_bytes(path));
  return isa::assemble(config::read_text(path));
}

// "3=prog.bin" pins the node id; a bare path needs a `.node` directive.
std::pair<int, isa::Program> load_node_program(const std::string& arg) {
  auto eq = arg.find('=');
  if (eq != std::string::npos && eq > 0 && std::all_of(arg.begin(), arg.begin() + eq, ::isdigit)) {
    isa::Program p = load_program(arg.substr(eq + 1));
    int id = std::stoi(arg.substr(0, eq));
    p.node = id;
    return {id, std::move(p)};
  }
  isa::Program p = load_program(arg);
  if (!p.node) throw Error(ErrorKind::kConfig, arg + ": no .node directive; use ID=" + arg);
  return {*p.node, std::move(p)};
}

void emit(const std::string& path, std::string_view text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    config::write_text(path, text);
  }
}

// Controllers 0..n-1 under one router with neighbor mesh links.
fabric::Topology line_topology(int n, const bench::Latencies& lat) {
  fabric::Topology t;
  int router = fabric::router_addr(0);
  t.routers = {router};
  t.router_delay = lat.router_delay;
  t.lockstep_latency = lat.lockstep;
  for (int i = 0; i < n; ++i) {
    NodeConfig c;
    c.capture_ports = {2};
    t.controllers[i] = c;
    t.parent[i] = {router, lat.tree_up, lat.tree_down};
    if (i > 0) t.add_mesh(i - 1, i, lat.mesh);
  }
  return t;
}

struct RunArgs {
  std::string topology;
  std::string manifest;
  std::vector<std::string> programs;
  std::string mode;
  std::uint64_t seed = 1;
  int shots = 1;
  Cycle cycle_cap = 10'000'000;
  double cycle_ns = 4.0;
  bool random_outcomes = false;
  std::vector<std::string> outcomes;
  std::string telf;
  std::string report;
  int telf_shot = 0;
};

int do_run(const RunArgs& a) {
  sim::SimConfig cfg;
  cfg.topology = config::topology_from_json(config::read_json(a.topology));
  if (!a.manifest.empty()) {
    auto m = config::read_json(a.manifest);
    fs::path dir = fs::path(a.manifest).parent_path();
    if (m.contains("mode")) cfg.mode = sim::mode_from_string(m["mode"].get<std::string>());
    if (m.contains("cycle_ns")) cfg.cycle_ns = m["cycle_ns"].get<double>();
    for (const auto& [id, entry] : m.at("controllers").items()) {
      isa::Program p = load_program(dir / entry.at("file").get<std::string>());
      p.node = std::stoi(id);
      cfg.programs[std::stoi(id)] = std::move(p);
    }
    for (const auto& [r, members] : m.value("sync_groups", config::Json::object()).items()) {
      cfg.topology.sync_groups[std::stoi(r)] = members.get<std::vector<int>>();
    }
  }
  for (const auto& arg : a.programs) {
    auto [id, p] = load_node_program(arg);
    cfg.programs[id] = std::move(p);
  }
  if (cfg.programs.empty()) throw Error(ErrorKind::kConfig, "no programs given");
  if (!a.mode.empty()) cfg.mode = sim::mode_from_string(a.mode);
  if (a.cycle_ns > 0) cfg.cycle_ns = a.cycle_ns;
  cfg.shots = a.shots;
  cfg.cycle_cap = a.cycle_cap;
  cfg.outcomes.random = a.random_outcomes;
  cfg.outcomes.seed = a.seed;
  // "node:port=0,1,1"
  for (const auto& spec : a.outcomes) {
    auto colon = spec.find(':'), eq = spec.find('=');
    if (colon == std::string::npos || eq == std::string::npos || eq < colon) {
      throw Error(ErrorKind::kConfig, "outcome list '" + spec + "' is not node:port=b,b,...");
    }
    std::vector<int> bits;
    std::stringstream ss(spec.substr(eq + 1));
    for (std::string b; std::getline(ss, b, ',');) bits.push_back(std::stoi(b));
    cfg.outcomes.fixed[{std::stoi(spec.substr(0, colon)), std::stoi(spec.substr(colon + 1, eq - colon - 1))}] = bits;
  }

  sim::RunResult r = sim::run(cfg);
  if (a.telf_shot < 0 || a.telf_shot >= static_cast<int>(r.shots.size())) {
    throw Error(ErrorKind::kConfig, "--telf-shot out of range");
  }
  emit(a.telf, sim::emit_telf(r.shots[a.telf_shot].traces, r.cycle_ns, r.config_hash));
  if (!a.report.empty()) {
    std::ostringstream rep;
    sim::write_report(r, cfg.topology, rep);
    emit(a.report, rep.str());
  }
  return 0;
}

struct CompileArgs {
  std::string circuit;
  std::string mapping;
  std::string topology;
  std::string mode = "bisp";
  std::string out_dir = ".";
  bool no_hoist = false;
  double cycle_ns = 4.0;
};

int do_compile(const CompileArgs& a) {
  dqcc::CircuitIR ir = dqcc::parse_ir(config::read_text(a.circuit));
  dqcc::MappingConfig mapping = a.mapping.empty() ? dqcc::one_per_controller(ir)
                                                  : config::mapping_from_json(config::read_json(a.mapping));
  dqcc::CompileOptions opt;
  if (!a.topology.empty()) {
    opt.topology = config::topology_from_json(config::read_json(a.topology));
  } else {
    int n = 0;
    for (const auto& [q, p] : mapping.qubits) n = std::max(n, p.controller + 1);
    opt.topology = line_topology(n, {});
  }
  opt.mode = sim::mode_from_string(a.mode);
  opt.cycle_ns = a.cycle_ns;
  opt.hoist = !a.no_hoist;
  dqcc::Compiled c = dqcc::compile(ir, mapping, opt);
  fs::create_directories(a.out_dir);
  for (const auto& [id, p] : c.programs) {
    config::write_text(fs::path(a.out_dir) / ("node" + std::to_string(id) + ".s"), isa::disassemble(p));
  }
  config::write_text(fs::path(a.out_dir) / "manifest.json", c.manifest);
  if (a.topology.empty()) {
    config::write_text(fs::path(a.out_dir) / "topology.json", config::topology_to_json(opt.topology).dump(2) + "\n");
  }
  std::cout << "wrote " << c.programs.size() << " programs to " << a.out_dir << "\n";
  return 0;
}

struct BenchArgs {
  std::string spec;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> qubits;
  std::optional<double> p;
  std::vector<std::string> benchmarks;
};

int do_bench(const BenchArgs& a) {
  bench::BenchmarkSpec s = a.spec.empty() ? bench::default_spec() : config::spec_from_json(config::read_json(a.spec));
  if (a.seed) s.seed = *a.seed;
  if (a.qubits) s.qubits = *a.qubits;
  if (a.p) s.substitution_p = *a.p;
  if (!a.benchmarks.empty()) s.benchmarks = a.benchmarks;
  std::ostringstream csv;
  bench::write_csv(bench::run_comparison(s), csv);
  emit(a.out, csv.str());
  return 0;
}

struct Fig10Args {
  bench::Fig10Params params;
  std::string out_dir;
  double cycle_ns = 4.0;
};

int do_fig10(const Fig10Args& a) {
  bench::Fig10 fig = bench::gen_fig10(a.params);
  bench::Fig10Result r = bench::run_fig10(fig, a.cycle_ns);
  if (!a.out_dir.empty()) {
    fs::create_directories(a.out_dir);
    fs::path d(a.out_dir);
    config::write_text(d / "control.s", fig.control_text);
    config::write_text(d / "readout.s", fig.readout_text);
    config::write_text(d / "topology.json", config::topology_to_json(fig.topology).dump(2) + "\n");
    config::write_text(d / "fig10.telf", sim::emit_telf(r.run.shots.at(0).traces, a.cycle_ns, r.run.config_hash));
  }
  std::cout << "iter control_sync readout_sync yellow_c yellow_r blue_c blue_r\n";
  for (std::size_t i = 0; i < r.yellow.size(); ++i) {
    std::cout << i << ' ' << r.control_sync_start.at(i) << ' ' << r.readout_sync_start.at(i) << ' '
              << r.yellow[i].first << ' ' << r.yellow[i].second << ' ' << r.blue[i].first << ' '
              << r.blue[i].second << "\n";
  }
  std::cout << "aligned " << (r.aligned() ? "yes" : "no") << "\n";
  std::cout << "advance_ns";
  for (Cycle c : r.advance()) std::cout << ' ' << static_cast<double>(c) * a.cycle_ns;
  std::cout << "\n";
  return r.aligned() ? 0 : static_cast<int>(ErrorKind::kRuntime);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HISQ/BISP distributed control simulator"};
  app.require_subcommand(1);

  std::string asm_in, asm_out;
  auto* assemble = app.add_subcommand("assemble", "assemble text to flat binary");
  assemble->add_option("input", asm_in, "assembly file")->required();
  assemble->add_option("-o,--output", asm_out, "binary output (default: input with .bin)");

  std::string dis_in, dis_out;
  auto* disassemble = app.add_subcommand("disassemble", "print canonical assembly of a .bin or .s file");
  disassemble->add_option("input", dis_in, "binary or assembly file")->required();
  disassemble->add_option("-o,--output", dis_out, "output file (default: stdout)");

  RunArgs ra;
  auto* run = app.add_subcommand("run", "simulate programs and write a TELF trace");
  run->add_option("programs", ra.programs, "program files, PATH or ID=PATH");
  run->add_option("-t,--topology", ra.topology, "topology JSON")->required();
  run->add_option("--manifest", ra.manifest, "compile manifest; loads its programs and sync groups");
  run->add_option("-m,--mode", ra.mode, "bisp or lockstep");
  run->add_option("-s,--seed", ra.seed, "outcome seed");
  run->add_option("--shots", ra.shots, "shot count")->check(CLI::PositiveNumber);
  run->add_option("--cycle-cap", ra.cycle_cap, "deadlock cap in cycles")->check(CLI::PositiveNumber);
  run->add_option("--cycle-ns", ra.cycle_ns, "clock period");
  run->add_flag("--random-outcomes", ra.random_outcomes, "draw captures from the seeded source");
  run->add_option("--outcome", ra.outcomes, "fixed outcomes node:port=b,b,...");
  run->add_option("-o,--telf", ra.telf, "TELF output (default: stdout)");
  run->add_option("--telf-shot", ra.telf_shot, "shot written to the TELF file");
  run->add_option("-r,--report", ra.report, "text report output");

  CompileArgs ca;
  auto* compile = app.add_subcommand("compile", "compile a circuit to per-controller assembly");
  compile->add_option("circuit", ca.circuit, "circuit IR file")->required();
  compile->add_option("--mapping", ca.mapping, "mapping JSON (default: one qubit per controller)");
  compile->add_option("-t,--topology", ca.topology, "topology JSON (default: line under one router)");
  compile->add_option("-m,--mode", ca.mode, "bisp or lockstep");
  compile->add_option("-d,--out-dir", ca.out_dir, "output directory");
  compile->add_option("--cycle-ns", ca.cycle_ns, "clock period");
  compile->add_flag("--no-hoist", ca.no_hoist, "book nearby syncs at the ready point");

  BenchArgs ba;
  auto* benchc = app.add_subcommand("bench", "BISP vs lock-step comparison as CSV");
  benchc->add_option("--spec", ba.spec, "benchmark spec JSON (default: built-in suite)");
  benchc->add_option("-o,--output", ba.out, "CSV output (default: stdout)");
  benchc->add_option("-s,--seed", ba.seed, "seed for circuits, substitution and outcomes");
  benchc->add_option("-n,--qubits", ba.qubits, "data qubits per benchmark");
  benchc->add_option("-p,--substitution-p", ba.p, "probability of a dynamic long-range CNOT");
  benchc->add_option("-b,--benchmark", ba.benchmarks, "benchmark names (ghz bv qft adder random lrcnot)");

  Fig10Args fa;
  auto* fig10 = app.add_subcommand("fig10", "two-board sync experiment");
  fig10->add_option("--iterations", fa.params.iterations)->check(CLI::PositiveNumber);
  fig10->add_option("--increment", fa.params.increment)->check(CLI::NonNegativeNumber);
  fig10->add_option("--link", fa.params.link)->check(CLI::PositiveNumber);
  fig10->add_option("--trigger-skew", fa.params.trigger_skew)->check(CLI::NonNegativeNumber);
  fig10->add_option("-d,--out-dir", fa.out_dir, "write listings, topology and TELF here");
  fig10->add_option("--cycle-ns", fa.cycle_ns, "clock period");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*assemble) {
      isa::Program p = isa::assemble(config::read_text(asm_in));
      auto bytes = isa::encode(p);
      fs::path out = asm_out.empty() ? fs::path(asm_in).replace_extension(".bin") : fs::path(asm_out);
      config::write_text(out, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
      return 0;
    }
    if (*disassemble) {
      emit(dis_out, isa::disassemble(load_program(dis_in)));
      return 0;
    }
    if (*run) return do_run(ra);
    if (*compile) return do_compile(ca);
    if (*benchc) return do_bench(ba);
    if (*fig10) return do_fig10(fa);
  } catch (const SyntaxError& e) {
    std::cerr << "syntax error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const Error& e) {
    std::cerr << to_string(e.kind()) << " error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const config::Json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::kConfig);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::kIo);
  }
  return 0;
}
