#include <future>
#include <iomanip>
#include <sstream>

#include "dhisq/bench.hpp"
#include "dhisq/error.hpp"

namespace dhisq::bench {

namespace {

struct Measured {
  sim::RunResult bisp;
  sim::RunResult lockstep;
};

sim::RunResult run_mode(const BenchmarkSpec& spec, const dqcc::CircuitIR& ir, const Device& dev,
                        sim::Mode mode) {
  dqcc::CompileOptions opt;
  opt.topology = dev.topology;
  opt.durations = spec.durations;
  opt.cycle_ns = spec.cycle_ns;
  opt.mode = mode;
  auto compiled = dqcc::compile(ir, dev.mapping, opt);
  sim::SimConfig cfg;
  cfg.topology = dev.topology;
  cfg.cycle_ns = spec.cycle_ns;
  cfg.durations = spec.durations;
  cfg.shots = spec.shots;
  cfg.outcomes.random = true;
  cfg.outcomes.seed = spec.seed;
  compiled.apply(cfg);
  return sim::run(cfg);
}

int columns_of(const dqcc::CircuitIR& ir) {
  int n = 0;
  for (const auto& q : ir.qubits) n = std::max(n, std::stoi(q.substr(1)) + 1);
  return n;
}

std::string number(double v) {
  std::ostringstream o;
  o << std::setprecision(10) << v;
  return o.str();
}

}  // namespace

BenchmarkSpec default_spec() {
  BenchmarkSpec s;
  s.benchmarks = suite_families();
  for (int t = 30; t <= 300; t += 30) s.t_grid_us.push_back(t);
  return s;
}

dqcc::CircuitIR benchmark_circuit(const BenchmarkSpec& spec, const std::string& name) {
  if (name == "lrcnot") return gen_long_range_cnot(spec.qubits);
  return convert_to_dynamic(static_circuit(name, spec.qubits, spec.seed), spec.seed, spec.substitution_p);
}

std::vector<ComparisonRow> run_comparison(const BenchmarkSpec& spec) {
  if (spec.benchmarks.empty()) throw Error(ErrorKind::kConfig, "benchmark list is empty");
  if (spec.t_grid_us.empty()) throw Error(ErrorKind::kConfig, "T1/T2 grid is empty");
  if (spec.shots < 1) throw Error(ErrorKind::kConfig, "shot count must be positive");

  std::vector<std::future<Measured>> jobs;
  for (const auto& name : spec.benchmarks) {
    jobs.push_back(std::async(std::launch::async, [&spec, name] {
      auto ir = benchmark_circuit(spec, name);
      Device dev = ladder_device(columns_of(ir), spec.latencies);
      return Measured{run_mode(spec, ir, dev, sim::Mode::kBisp), run_mode(spec, ir, dev, sim::Mode::kLockstep)};
    }));
  }

  std::vector<ComparisonRow> rows;
  for (std::size_t b = 0; b < jobs.size(); ++b) {
    Measured m = jobs[b].get();
    double rb = m.bisp.mean_runtime_ns(), rl = m.lockstep.mean_runtime_ns();
    for (double t : spec.t_grid_us) {
      ComparisonRow r;
      r.benchmark = spec.benchmarks[b];
      r.t1_us = r.t2_us = t;
      r.runtime_bisp_ns = rb;
      r.runtime_lockstep_ns = rl;
      r.reduction_pct = rl > 0 ? (1.0 - rb / rl) * 100.0 : 0.0;
      r.infidelity_bisp = sim::mean_infidelity(m.bisp, t * 1e-6, t * 1e-6);
      r.infidelity_lockstep = sim::mean_infidelity(m.lockstep, t * 1e-6, t * 1e-6);
      r.ratio = r.infidelity_bisp > 0 ? r.infidelity_lockstep / r.infidelity_bisp : 1.0;
      rows.push_back(r);
    }
  }
  return rows;
}

std::string csv_header() {
  return "benchmark,t1_us,t2_us,runtime_bisp_ns,runtime_lockstep_ns,reduction_pct,infidelity_bisp,"
         "infidelity_lockstep,ratio";
}

void write_csv(const std::vector<ComparisonRow>& rows, std::ostream& out) {
  out << csv_header() << "\n";
  for (const auto& r : rows) {
    out << r.benchmark << ',' << number(r.t1_us) << ',' << number(r.t2_us) << ',' << number(r.runtime_bisp_ns)
        << ',' << number(r.runtime_lockstep_ns) << ',' << number(r.reduction_pct) << ','
        << number(r.infidelity_bisp) << ',' << number(r.infidelity_lockstep) << ',' << number(r.ratio) << "\n";
  }
}

}  // namespace dhisq::bench
