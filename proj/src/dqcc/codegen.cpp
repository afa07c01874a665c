#include <algorithm>
#include <limits>
#include <set>

#include "dhisq/dqcc.hpp"
#include "dhisq/error.hpp"
#include "json.hpp"

namespace dhisq::dqcc {

namespace {

using isa::Instruction;
using isa::Opcode;

constexpr int kTmp = 5;      // received datum
constexpr int kPred = 6;     // predicate accumulator
constexpr int kPredTmp = 7;
constexpr int kCounter = 8;  // shot-loop counter
constexpr Cycle kMaxWait = (1 << 21) - 1;

bool step_before(const Step& a, const Step& b) {
  int ma = a.kind == Step::Kind::kSyncPoint ? 0 : 1;
  int mb = b.kind == Step::Kind::kSyncPoint ? 0 : 1;
  return std::tie(a.time, ma, a.seq) < std::tie(b.time, mb, b.seq);
}

Instruction make(Opcode op, int rd = 0, int rs1 = 0, int rs2 = 0, std::int32_t imm = 0) {
  Instruction i;
  i.op = op;
  i.rd = static_cast<std::uint8_t>(rd);
  i.rs1 = static_cast<std::uint8_t>(rs1);
  i.rs2 = static_cast<std::uint8_t>(rs2);
  i.imm = imm;
  return i;
}

constexpr Cycle kNever = std::numeric_limits<Cycle>::min();

// What the nominal pipeline walk needs to know about one instruction.
struct Meta {
  Cycle block = kNever;   // recv: nominal arrival
  Cycle stamp = kNever;   // cw: nominal global stamp
  Cycle depart = kNever;  // send: assumed departure
  Cycle booking = kNever; // sync: nominal booking
  int meas = -1;
  int op = -1;
  int cond = -1;          // enclosing conditional
  bool skip = false;      // off the all-taken path
};

class Emitter {
 public:
  explicit Emitter(int id) { prog_.node = id; }

  Meta& emit(Instruction inst, std::string note = {}) {
    if (!note.empty()) prog_.annotations[prog_.code.size()] = std::move(note);
    prog_.code.push_back(inst);
    Meta m;
    m.cond = cond_;
    m.skip = skip_;
    meta_.push_back(m);
    return meta_.back();
  }

  void wait_to(Cycle local) {
    Cycle d = local - cur_;
    if (d < 0) {
      throw Error(ErrorKind::kCompile, "internal: controller " + std::to_string(*prog_.node) +
                                           " timeline runs backwards by " + std::to_string(-d));
    }
    while (d > 0) {
      Cycle chunk = std::min(d, kMaxWait);
      emit(make(Opcode::kWaitI, 0, 0, 0, static_cast<std::int32_t>(chunk)));
      d -= chunk;
    }
    cur_ = local;
  }

  std::string label(const char* prefix) { return prefix + std::to_string(labels_++); }
  void bind(const std::string& name) { prog_.labels[name] = prog_.code.size(); }
  void branch(Opcode op, int rs1, int rs2, const std::string& target) {
    fixups_.push_back({prog_.code.size(), target});
    emit(make(op, 0, rs1, rs2));
  }

  void load_immediate(int rd, std::int32_t value) {
    if (value >= -2048 && value < 2048) {
      emit(make(Opcode::kAddi, rd, 0, 0, value));
      return;
    }
    std::int32_t lo = ((value & 0xfff) ^ 0x800) - 0x800;
    std::int32_t hi = static_cast<std::int32_t>((static_cast<std::uint32_t>(value - lo) >> 12) & 0xfffff);
    emit(make(Opcode::kLui, rd, 0, 0, hi));
    if (lo) emit(make(Opcode::kAddi, rd, rd, 0, lo));
  }

  void predicate(const Step& s) {
    emit(make(Opcode::kLw, kPred, 0, 0, s.pred_addrs[0]));
    for (std::size_t i = 1; i < s.pred_addrs.size(); ++i) {
      emit(make(Opcode::kLw, kPredTmp, 0, 0, s.pred_addrs[i]));
      emit(make(Opcode::kXor, kPred, kPred, kPredTmp));
    }
    if (s.negate) emit(make(Opcode::kXori, kPred, kPred, 0, 1));
  }

  void op(const Step& s) {
    wait_to(s.time - shift_);
    Instruction i = make(Opcode::kCwII, 0, 0, 0, s.port);
    i.codeword = s.codeword;
    Meta& m = emit(i, s.label);
    m.stamp = s.time;
    m.op = s.op;
  }

  void ops(std::vector<Step> body) {
    std::sort(body.begin(), body.end(), step_before);
    for (const auto& b : body) op(b);
  }

  void step(const Step& s) {
    switch (s.kind) {
      case Step::Kind::kOp:
        op(s);
        break;
      case Step::Kind::kSync:
        wait_to(s.time - shift_);
        {
          Meta& m = emit(make(Opcode::kSync, 0, 0, 0, s.target), "pad=" + std::to_string(s.pad));
          m.booking = s.time;
          m.op = s.op;
        }
        cur_ += s.advance;
        break;
      case Step::Kind::kSyncPoint:
        shift_ += s.delta;
        break;
      case Step::Kind::kForward: {
        for (int i = 0; i < s.drains; ++i) emit(make(Opcode::kRecv, kTmp, 0, 0, s.source));
        emit(make(Opcode::kRecv, kTmp, 0, 0, s.source)).block = s.arrivals[0];
        Cycle j = 0;
        for (int k : s.sends) {
          Meta& m = emit(make(Opcode::kSend, 0, kTmp, 0, k));
          m.meas = s.meas;
          m.depart = s.depart + ++j * ratio_;
        }
        if (s.store >= 0) emit(make(Opcode::kSw, 0, 0, kTmp, s.store));
        cur_ = std::max(cur_, s.time - shift_);
        break;
      }
      case Step::Kind::kDrain:
        for (int i = 0; i < s.drains; ++i) emit(make(Opcode::kRecv, kTmp, 0, 0, s.source));
        cur_ = std::max(cur_, s.time - shift_);
        break;
      case Step::Kind::kCond: {
        cond_ = s.cond;
        recvs(s);
        if (!s.recvs.empty()) cur_ = std::max(cur_, s.recv_anchor - shift_);
        predicate(s);
        wait_to(s.region - shift_);
        std::string skip = label("skip");
        branch(Opcode::kBeq, kPred, 0, skip);
        ops(s.body);
        bind(skip);
        cond_ = -1;
        break;
      }
      case Step::Kind::kLockIf: {
        wait_to(s.time - shift_);
        cond_ = s.cond;
        recvs(s);
        if (!s.recvs.empty()) cur_ = std::max(cur_, s.recv_anchor - shift_);
        predicate(s);
        wait_to(s.region - shift_);
        std::string other = label("else"), end = label("end");
        Cycle stop = s.region + s.reserved - shift_;
        branch(Opcode::kBeq, kPred, 0, other);
        ops(s.body);
        wait_to(stop);
        branch(Opcode::kJal, 0, 0, end);
        bind(other);
        cur_ = s.region - shift_;
        skip_ = true;
        wait_to(stop);
        skip_ = false;
        bind(end);
        cond_ = -1;
        break;
      }
    }
  }

  void recvs(const Step& s) {
    for (std::size_t i = 0; i < s.recvs.size(); ++i) {
      emit(make(Opcode::kRecv, kTmp, 0, 0, s.recvs[i].first)).block = s.arrivals[i];
      emit(make(Opcode::kSw, 0, 0, kTmp, s.recvs[i].second));
    }
  }

  void set_ratio(int r) { ratio_ = r; }
  const std::vector<Meta>& meta() const { return meta_; }

  void reset_timeline() {
    cur_ = 0;
    shift_ = 0;
  }
  Cycle shift() const { return shift_; }

  isa::Program finish() {
    for (const auto& [at, name] : fixups_) prog_.code[at].imm = static_cast<std::int32_t>(prog_.labels.at(name));
    return std::move(prog_);
  }

 private:
  isa::Program prog_;
  Cycle cur_ = 0;
  Cycle shift_ = 0;
  int labels_ = 0;
  std::vector<std::pair<std::size_t, std::string>> fixups_;
  std::vector<Meta> meta_;
  int cond_ = -1;
  bool skip_ = false;
  Cycle ratio_ = 1;
};

isa::Program lower(const Schedule& sched, int c, std::vector<Meta>* meta = nullptr) {
  const Plan& plan = sched.plan;
  Emitter e(c);
  e.set_ratio(sched.options.topology.controllers.at(c).pipeline_ratio);
  std::vector<Step> steps;
  if (auto it = plan.steps.find(c); it != plan.steps.end()) steps = it->second;
  std::sort(steps.begin(), steps.end(), step_before);
  std::string loop;
  if (plan.repeat > 0) {
    e.load_immediate(kCounter, plan.repeat);
    loop = e.label("loop");
    e.bind(loop);
    if (plan.region_router >= 0) e.emit(make(Opcode::kSync, 0, 0, 0, plan.region_router), "pad=0").block = 0;
    e.reset_timeline();
  }
  for (const auto& s : steps) e.step(s);
  if (plan.repeat > 0) {
    e.wait_to(plan.busy_end.at(c) - e.shift());
    e.emit(make(Opcode::kAddi, kCounter, kCounter, 0, -1));
    e.branch(Opcode::kBne, kCounter, 0, loop);
  }
  if (meta) *meta = e.meta();
  return e.finish();
}

// Nominal start of the pipeline relative to the trigger.
constexpr Cycle kStartLead = 16;

Compiled lower_all(const Schedule& in, sim::Mode mode) {
  if (in.options.mode != mode) {
    throw Error(ErrorKind::kCompile, std::string("schedule was built for ") +
                                         std::string(sim::to_string(in.options.mode)) + " mode");
  }
  const Schedule& sched = in;
  Compiled out;
  out.mode = mode;
  std::set<int> controllers;
  for (const auto& [q, p] : sched.mapping.qubits) {
    if (sched.ir.qubit_index(q) >= 0) controllers.insert(p.controller);
  }
  for (int c : controllers) out.programs[c] = lower(sched, c);
  if (sched.plan.region_router >= 0) out.sync_groups[sched.plan.region_router] = sched.plan.participants;

  nlohmann::ordered_json m;
  m["mode"] = sim::to_string(mode);
  m["cycle_ns"] = sched.options.cycle_ns;
  m["repeat"] = sched.plan.repeat;
  m["makespan_cycles"] = sched.makespan;
  nlohmann::ordered_json progs = nlohmann::ordered_json::object();
  for (const auto& [c, p] : out.programs) {
    progs[std::to_string(c)] = {{"file", "node" + std::to_string(c) + ".s"},
                                {"instructions", p.code.size()}};
  }
  m["controllers"] = progs;
  nlohmann::ordered_json groups = nlohmann::ordered_json::object();
  for (const auto& [r, members] : out.sync_groups) groups[std::to_string(r)] = members;
  m["sync_groups"] = groups;
  nlohmann::ordered_json syncs = nlohmann::ordered_json::array();
  for (const auto& s : sched.syncs) {
    nlohmann::ordered_json j;
    j["kind"] = s.kind == SyncNeed::kRegion ? "region" : "nearby";
    j["controllers"] = s.controllers;
    j["target"] = s.target;
    if (s.kind == SyncNeed::kNearby) {
      nlohmann::ordered_json b = nlohmann::ordered_json::object();
      for (const auto& [c, v] : s.booking) b[std::to_string(c)] = v;
      j["booking"] = b;
      j["ready"] = s.ready;
      j["resolved"] = s.resolved;
      j["predicted_overhead"] = s.predicted_overhead;
      j["op"] = s.op;
    }
    syncs.push_back(j);
  }
  m["syncs"] = syncs;
  m["diagnostics"] = sched.diagnostics;
  out.manifest = m.dump(2) + "\n";
  return out;
}

}  // namespace

Tuning check_pipeline(const Schedule& sched) {
  Tuning need;
  std::set<int> controllers;
  for (const auto& [q, p] : sched.mapping.qubits) {
    if (sched.ir.qubit_index(q) >= 0) controllers.insert(p.controller);
  }
  for (int c : controllers) {
    std::vector<Meta> meta;
    lower(sched, c, &meta);
    Cycle ratio = sched.options.topology.controllers.at(c).pipeline_ratio;
    Cycle p = -kStartLead;
    for (const auto& m : meta) {
      if (m.skip) continue;
      Cycle e = std::max(p, m.block);
      e += ((ratio - e % ratio) % ratio);  // issue slots fall on multiples of the ratio
      p = e + ratio;
      if (m.stamp != kNever && m.stamp < e + 1) {
        Cycle& v = m.cond >= 0 ? need.extra_pad[m.cond] : need.op_delay[m.op];
        v = std::max(v, e + 1 - m.stamp);
      }
      if (m.booking != kNever && m.booking < e + 1) {
        Cycle& v = need.sync_delay[{m.op, c}];
        v = std::max(v, e + 1 - m.booking);
      }
      if (m.depart != kNever && m.depart != e) {
        // Signed: a send that leaves early arrives early too.
        auto [it, fresh] = need.depart_delay.try_emplace(m.meas, e - m.depart);
        if (!fresh) it->second = std::max(it->second, e - m.depart);
      }
    }
  }
  return need;
}

void Compiled::apply(sim::SimConfig& config) const {
  config.mode = mode;
  config.programs = programs;
  for (const auto& [r, members] : sync_groups) config.topology.sync_groups[r] = members;
}

Compiled codegen_bisp(const Schedule& sched) {
  if (!sched.synced) return lower_all(insert_sync(sched), sim::Mode::kBisp);
  return lower_all(sched, sim::Mode::kBisp);
}

Compiled codegen_lockstep(const Schedule& sched) { return lower_all(sched, sim::Mode::kLockstep); }

Compiled compile(const CircuitIR& ir, const MappingConfig& mapping, const CompileOptions& options) {
  Schedule s = insert_sync(schedule(ir, mapping, options));
  return options.mode == sim::Mode::kBisp ? codegen_bisp(s) : codegen_lockstep(s);
}

}  // namespace dhisq::dqcc
