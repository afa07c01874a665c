#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>

#include "dhisq/dqcc.hpp"
#include "dhisq/error.hpp"

namespace dhisq::dqcc {

namespace {

[[noreturn]] void compile_error(const std::string& msg) { throw Error(ErrorKind::kCompile, msg); }

Cycle to_cycles(double ns, double cycle_ns) {
  return static_cast<Cycle>(std::ceil(ns / cycle_ns - 1e-9));
}

std::string label_of(const std::string& gate, const std::vector<std::string>& qubits) {
  std::string s = gate + "@";
  for (std::size_t i = 0; i < qubits.size(); ++i) s += (i ? "," : "") + qubits[i];
  return s;
}

struct Capture {
  Cycle end = 0;     // result ready, nominal global cycle
  Cycle commit = 0;  // physical output cycle
  int port = 0;
  int meas = 0;
  int bit = 0;
};

struct Datum {
  int meas = 0;
  int bit = 0;
  Cycle arrival = 0;
};

struct Avail {
  int meas = -1;
  Cycle at = 0;
  int post = 0;  // instructions after the blocking recv of an own capture
};

class Engine {
 public:
  Engine(const CircuitIR& ir, const MappingConfig& mapping, const CompileOptions& options, bool with_sync,
         const Tuning& tuning)
      : ir_(ir), map_(mapping), opt_(options), topo_(options.topology), sync_(with_sync), tune_(tuning) {}

  Schedule run() {
    topo_.validate();
    flatten();
    validate();
    durations();
    prepass();
    for (std::size_t i = 0; i < stmts_.size(); ++i) {
      const Stmt& s = *stmts_[i];
      switch (s.kind) {
        case StmtKind::kGate: gate(s, -1); break;
        case StmtKind::kMeasure: measure(s); break;
        case StmtKind::kBarrier: barrier(s); break;
        case StmtKind::kIf: conditional(s); break;
        case StmtKind::kRepeat: compile_error("repeat must enclose the whole program");
      }
    }
    finish();

    Schedule out;
    out.ir = ir_;
    out.mapping = map_;
    out.options = opt_;
    out.ops = std::move(ops_);
    out.syncs = std::move(syncs_);
    out.diagnostics = std::move(diags_);
    out.synced = sync_ || lockstep();
    out.plan = std::move(plan_);
    out.tuning = tune_;
    for (const auto& op : out.ops) out.makespan = std::max(out.makespan, op.start + op.duration);
    return out;
  }

 private:
  bool lockstep() const { return opt_.mode == sim::Mode::kLockstep; }

  int ctrl(const std::string& q) const { return map_.ports(q).controller; }
  const NodeConfig& cfg(int c) const { return topo_.controllers.at(c); }
  int qi(const std::string& q) const { return ir_.qubit_index(q); }

  void flatten() {
    for (const auto& s : ir_.body) {
      if (s.kind == StmtKind::kRepeat) {
        if (ir_.body.size() != 1) compile_error("repeat must enclose the whole program");
        plan_.repeat = s.count;
        for (const auto& b : s.body) stmts_.push_back(&b);
      } else {
        stmts_.push_back(&s);
      }
    }
  }

  void validate() {
    for (const auto& q : ir_.qubits) {
      const auto& p = map_.ports(q);
      auto it = topo_.controllers.find(p.controller);
      if (it == topo_.controllers.end()) {
        compile_error("qubit '" + q + "' maps to unknown controller " + std::to_string(p.controller));
      }
      for (int port : {p.drive, p.flux, p.measure}) {
        if (port < 0 || port >= it->second.ports) {
          compile_error("port " + std::to_string(port) + " of qubit '" + q + "' out of range");
        }
      }
      if (!it->second.capture_ports.count(p.measure)) {
        compile_error("measure port " + std::to_string(p.measure) + " of qubit '" + q +
                      "' is not a capture port on controller " + std::to_string(p.controller));
      }
      used_.insert(p.controller);
    }
    std::size_t need = 4 * ir_.bits.size();
    for (int c : used_) {
      if (need > cfg(c).memory_bytes) compile_error("bit table does not fit controller memory");
    }
    for (const Stmt* s : stmts_) check_stmt(*s, false);
  }

  void check_stmt(const Stmt& s, bool in_if) {
    if (s.kind == StmtKind::kGate && s.qubits.size() == 2) {
      int a = ctrl(s.qubits[0]), b = ctrl(s.qubits[1]);
      if (a != b && !topo_.mesh_latency(a, b)) {
        compile_error("two-qubit gate on " + s.qubits[0] + "," + s.qubits[1] + ": controllers " +
                      std::to_string(a) + " and " + std::to_string(b) + " are not mesh-adjacent");
      }
      if (in_if && a != b && !lockstep()) {
        compile_error("conditional two-qubit gate spans controllers " + std::to_string(a) + " and " +
                      std::to_string(b));
      }
    }
    if (in_if && s.kind != StmtKind::kGate) compile_error("only gates are allowed inside a conditional");
    if (s.kind == StmtKind::kIf) {
      for (const auto& b : s.body) check_stmt(b, true);
    }
  }

  void durations() {
    d1_ = to_cycles(opt_.durations.single_ns, opt_.cycle_ns);
    d2_ = to_cycles(opt_.durations.two_qubit_ns, opt_.cycle_ns);
    dm_ = to_cycles(opt_.durations.measure_ns, opt_.cycle_ns);
    ready_.assign(ir_.qubits.size(), 0);
  }

  // Which controllers consume each measurement.
  void prepass() {
    std::map<std::string, int> latest;
    int meas = 0;
    for (const Stmt* s : stmts_) {
      if (s->kind == StmtKind::kMeasure) {
        latest[s->bit] = meas++;
      } else if (s->kind == StmtKind::kIf) {
        std::set<int> ks;
        for (const auto& b : s->body) {
          for (const auto& q : b.qubits) ks.insert(ctrl(q));
        }
        for (const auto& bit : s->pred.bits) {
          auto it = latest.find(bit);
          if (it == latest.end()) compile_error("conditional on bit '" + bit + "' before it is measured");
          consumers_[it->second].insert(ks.begin(), ks.end());
        }
      }
    }
  }

  Step& place(int c, Step step) {
    step.seq = seq_++;
    auto it = redirect_.find(c);
    auto& list = it != redirect_.end() ? *it->second : plan_.steps[c];
    list.push_back(std::move(step));
    return list.back();
  }

  void op_step(int c, Cycle t, int port, std::uint32_t cw, const std::string& label) {
    Step s;
    s.kind = Step::Kind::kOp;
    s.op = static_cast<int>(ops_.size());
    s.time = t;
    s.port = port;
    s.codeword = cw;
    s.label = label;
    place(c, std::move(s));
    last_start_[c] = std::max(last_start_[c], t);
  }

  // Global cycle at which controller c's timeline reaches local(a) + k,
  // given the pause windows booked on it so far.
  Cycle anchor_global(int c, Cycle a, Cycle k) const {
    auto it = windows_.find(c);
    if (it == windows_.end()) return a + k;
    Cycle g = a;
    for (const auto& [p, r] : it->second) {
      if (p <= g && g < r) g = r;
    }
    for (const auto& [p, r] : it->second) {
      if (p < g) continue;
      if (g + k <= p) break;
      k -= p - g;
      g = r;
    }
    return g + k;
  }

  Cycle base_for(int c) const {
    Cycle b = floor_.count(c) ? floor_.at(c) : 0;
    if (auto it = region_.find(c); it != region_.end()) b = std::max(b, it->second);
    if (lockstep()) b = std::max(b, flow_);
    return b;
  }

  void gate(const Stmt& s, int cond) {
    ScheduledOp op;
    op.id = ops_.size();
    op.gate = s.name;
    op.qubits = s.qubits;
    op.conditional = cond;
    std::string label = label_of(s.name, s.qubits);
    std::uint32_t cw = map_.codeword(s.name, s.qubits);
    if (s.qubits.size() == 1) {
      int q = qi(s.qubits[0]);
      int c = ctrl(s.qubits[0]);
      Cycle t = std::max(ready_[q], base_for(c)) + tuned(tune_.op_delay, op.id);
      op_step(c, t, map_.ports(s.qubits[0]).drive, cw, label);
      op.start = t;
      op.duration = d1_;
      op.controllers = {c};
      ready_[q] = t + d1_;
    } else {
      int qa = qi(s.qubits[0]), qb = qi(s.qubits[1]);
      int a = ctrl(s.qubits[0]), b = ctrl(s.qubits[1]);
      Cycle t = std::max({ready_[qa], ready_[qb], base_for(a), base_for(b)}) + tuned(tune_.op_delay, op.id);
      if (a != b && !lockstep() && domain_[a] != domain_[b]) {
        op.sync = SyncNeed::kNearby;
        if (sync_) t = nearby_sync(a, b, t, op.id);
        int d = next_domain_++;
        domain_[a] = domain_[b] = d;
      }
      op_step(a, t, map_.ports(s.qubits[0]).flux, cw, label);
      op_step(b, t, map_.ports(s.qubits[1]).flux, cw, label);
      op.start = t;
      op.duration = d2_;
      op.controllers = a == b ? std::vector<int>{a} : std::vector<int>{std::min(a, b), std::max(a, b)};
      ready_[qa] = ready_[qb] = t + d2_;
    }
    ops_.push_back(std::move(op));
  }

  // Books a nearby sync between a and b for an op ready at t; returns the
  // predicted common resumption cycle.
  Cycle nearby_sync(int a, int b, Cycle t, std::size_t op) {
    Cycle n = *topo_.mesh_latency(a, b);
    SyncPoint sp;
    sp.kind = SyncNeed::kNearby;
    sp.controllers = {std::min(a, b), std::max(a, b)};
    sp.target = std::max(a, b);
    sp.ready = t;
    sp.op = op;
    Cycle resume = t;
    for (int x : {a, b}) {
      Cycle s = std::max({opt_.hoist ? t - n : t, seg_[x], last_start_[x]});
      if (auto it = tune_.sync_delay.find({static_cast<int>(op), x}); it != tune_.sync_delay.end()) s += it->second;
      sp.booking[x] = s;
      sp.point[x] = s + n;
      resume = std::max(resume, s + n);
      if (s > t - n) {
        std::ostringstream d;
        d << "sync " << a << "<->" << b << " for op " << op << ": controller " << x << " has margin "
          << (t - s) << " < N=" << n;
        diags_.push_back(d.str());
      }
    }
    sp.resolved = resume;
    sp.predicted_overhead = resume - t;
    for (int x : {a, b}) {
      Step bk;
      bk.kind = Step::Kind::kSync;
      bk.op = static_cast<int>(op);
      bk.time = sp.booking[x];
      bk.target = x == a ? b : a;
      bk.pad = sp.point[x] - t;
      bk.advance = n;
      place(x, std::move(bk));
      Step pt;
      pt.kind = Step::Kind::kSyncPoint;
      pt.time = resume;
      pt.delta = resume - sp.point[x];
      place(x, std::move(pt));
      seg_[x] = floor_[x] = resume;
      last_start_[x] = std::max(last_start_[x], sp.booking[x]);
      if (resume > sp.point[x]) {
        windows_[x].push_back({sp.point[x], resume});
        rebase_forwards(x);
      }
    }
    syncs_.push_back(std::move(sp));
    return resume;
  }

  // Own captures that land in a pause window re-anchor later than planned.
  void rebase_forwards(int x) {
    Cycle k = cfg(x).recv_anchor;
    for (auto& st : plan_.steps[x]) {
      if (st.kind != Step::Kind::kForward) continue;
      st.time = anchor_global(x, st.arrivals[0], k);
      if (st.store >= 0) {
        auto& av = avail_[x][st.store / 4];
        if (av.meas == st.meas) av.at = st.time;
      }
    }
  }

  void measure(const Stmt& s) {
    int q = qi(s.qubits[0]);
    int c = ctrl(s.qubits[0]);
    const auto& p = map_.ports(s.qubits[0]);
    Cycle t = std::max(ready_[q], base_for(c));
    if (!lockstep() && !captures_[c].empty()) {
      // Captures on one controller are read back in completion order, so keep
      // that order equal to statement order.
      const Capture& prev = captures_[c].back();
      Cycle earliest = prev.end - cfg(c).capture_latency - cfg(c).output_delay;
      t = std::max(t, p.measure < prev.port ? earliest + 1 : earliest);
    }
    t += tuned(tune_.op_delay, static_cast<int>(ops_.size()));
    op_step(c, t, p.measure, map_.codeword("measure", s.qubits), label_of("measure", s.qubits));
    ScheduledOp op;
    op.id = ops_.size();
    op.gate = "measure";
    op.qubits = s.qubits;
    op.bit = s.bit;
    op.start = t;
    op.duration = dm_;
    op.controllers = {c};
    ops_.push_back(op);
    ready_[q] = t + dm_;

    int meas = meas_count_++;
    int bit = ir_.bit_index(s.bit);
    bit_meas_[bit] = meas;
    Capture cap;
    cap.commit = t + cfg(c).output_delay;
    cap.end = cap.commit + cfg(c).capture_latency;
    cap.port = p.measure;
    cap.meas = meas;
    cap.bit = bit;
    meas_ctrl_[meas] = c;

    if (lockstep()) {
      bcast_.push_back({cap, cap.end + topo_.lockstep_latency});
      return;
    }
    auto& caps = captures_[c];
    if (!caps.empty() && std::tie(caps.back().end, caps.back().port) > std::tie(cap.end, cap.port)) {
      compile_error("measurements on controller " + std::to_string(c) +
                    " complete out of statement order");
    }
    caps.push_back(cap);
    auto cons = consumers_[meas];
    if (cons.empty()) return;

    const NodeConfig& nc = cfg(c);
    Step f;
    f.kind = Step::Kind::kForward;
    f.time = anchor_global(c, cap.end, nc.recv_anchor);
    f.arrivals = {cap.end};
    f.source = c;
    f.drains = static_cast<int>(caps.size() - 1 - drained_[c]);
    drained_[c] = caps.size();
    f.meas = meas;
    f.depart = cap.end + tuned(tune_.depart_delay, meas);
    int j = 0;
    for (int k : cons) {
      if (k == c) continue;
      f.sends.push_back(k);
      ++j;
      channel_[{c, k}].push_back({meas, bit, f.depart + j * nc.pipeline_ratio + topo_.datum_latency(c, k)});
    }
    int post = j;
    if (cons.count(c)) {
      f.store = 4 * bit;
      ++post;
      avail_[c][bit] = {meas, f.time, post};
    }
    Cycle busy = cap.end + (post + 2) * nc.pipeline_ratio + 1;
    if (busy > f.time) floor_[c] = std::max(floor_[c], busy);
    place(c, std::move(f));
  }

  void barrier(const Stmt& s) {
    Cycle m = lockstep() ? flow_ : 0;
    for (const auto& q : s.qubits) m = std::max(m, ready_[qi(q)]);
    for (const auto& q : s.qubits) ready_[qi(q)] = m;
  }

  static Cycle tuned(const std::map<int, Cycle>& m, int key) {
    auto it = m.find(key);
    return it == m.end() ? 0 : it->second;
  }

  static Cycle branch_pad(int recvs, int own_post, int bits, bool negate, const NodeConfig& nc) {
    int k = (recvs > 0 ? 2 * recvs - 1 : own_post) + bits + (bits - 1) + (negate ? 1 : 0) + 2;
    return std::max<Cycle>(0, (k + 2) * nc.pipeline_ratio + 1 - nc.recv_anchor);
  }

  std::vector<int> pred_addrs(const Predicate& p) const {
    std::vector<int> out;
    for (const auto& b : p.bits) out.push_back(4 * ir_.bit_index(b));
    return out;
  }

  void conditional(const Stmt& s) {
    int index = cond_count_++;
    if (lockstep()) {
      lock_conditional(s, index);
      return;
    }
    std::set<int> ks;
    for (const auto& b : s.body) {
      for (const auto& q : b.qubits) ks.insert(ctrl(q));
    }
    std::map<int, Step*> heads;
    for (int k : ks) {
      const NodeConfig& nc = cfg(k);
      Step head;
      head.kind = Step::Kind::kCond;
      head.pred_addrs = pred_addrs(s.pred);
      head.negate = s.pred.negate;
      Cycle r = std::max(floor_[k], last_start_[k]);
      Cycle anchor = 0;
      int own_post = 0;
      for (const auto& name : s.pred.bits) {
        int bit = ir_.bit_index(name);
        int meas = bit_meas_.at(bit);
        int src = meas_ctrl_.at(meas);
        auto& av = avail_[k];
        if (src != k && (!av.count(bit) || av[bit].meas != meas)) {
          auto& ch = channel_[{src, k}];
          while (true) {
            if (ch.empty()) compile_error("internal: datum for bit '" + name + "' was never sent");
            Datum d = ch.front();
            ch.pop_front();
            head.recvs.push_back({src, 4 * d.bit});
            head.arrivals.push_back(d.arrival);
            Cycle at = anchor_global(k, d.arrival, nc.recv_anchor);
            av[d.bit] = {d.meas, at, 0};
            anchor = std::max(anchor, at);
            if (d.meas == meas) break;
          }
        }
        if (!av.count(bit) || av[bit].meas != meas) compile_error("internal: bit '" + name + "' unavailable");
        r = std::max(r, av[bit].at);
        if (src == k) own_post = std::max(own_post, av[bit].post);
      }
      head.time = r;
      head.recv_anchor = anchor;
      head.cond = index;
      head.region = r + tuned(tune_.extra_pad, index) +
                    branch_pad(static_cast<int>(head.recvs.size()), own_post,
                               static_cast<int>(s.pred.bits.size()), s.pred.negate, nc);
      region_[k] = head.region;
      heads[k] = &place(k, std::move(head));
    }
    for (int k : ks) redirect_[k] = &heads[k]->body;
    std::map<int, Cycle> last;
    for (const auto& b : s.body) {
      gate(b, index);
      for (int c : ops_.back().controllers) last[c] = std::max(last[c], ops_.back().start);
    }
    redirect_.clear();
    for (int k : ks) {
      Cycle join = std::max(last[k], region_[k]);
      floor_[k] = seg_[k] = last_start_[k] = join;
      domain_[k] = next_domain_++;
    }
    region_.clear();
  }

  void lock_conditional(const Stmt& s, int index) {
    Cycle p = flow_;
    for (int c : used_) p = std::max(p, last_start_[c]);
    std::vector<std::pair<int, int>> recvs;
    std::vector<Cycle> arrivals;
    Cycle anchor = p;
    std::set<int> needed;
    for (const auto& name : s.pred.bits) {
      int meas = bit_meas_.at(ir_.bit_index(name));
      if (!received_.count(meas)) needed.insert(meas);
    }
    if (!needed.empty()) {
      auto key = [&](const auto& e) {
        return std::make_tuple(e.first.end, e.first.commit, meas_ctrl_.at(e.first.meas), e.first.port);
      };
      const std::pair<Capture, Cycle>* target = nullptr;
      for (const auto& e : bcast_) {
        if (needed.count(e.first.meas) && (!target || key(*target) < key(e))) target = &e;
      }
      std::vector<const std::pair<Capture, Cycle>*> pending;
      for (const auto& e : bcast_) {
        if (!received_.count(e.first.meas) && key(e) <= key(*target)) pending.push_back(&e);
      }
      std::sort(pending.begin(), pending.end(), [&](auto* x, auto* y) { return key(*x) < key(*y); });
      int lanchor = 0;
      for (int c : used_) lanchor = std::max(lanchor, cfg(c).recv_anchor);
      for (auto* e : pending) {
        recvs.push_back({isa::kCentralAddr, 4 * e->first.bit});
        arrivals.push_back(e->second);
        received_.insert(e->first.meas);
        anchor = std::max(anchor, e->second + lanchor);
      }
    }
    const NodeConfig& nc0 = cfg(*used_.begin());
    Cycle r = anchor + tuned(tune_.extra_pad, index) + branch_pad(static_cast<int>(recvs.size()), 0, static_cast<int>(s.pred.bits.size()),
                                  s.pred.negate, nc0);
    flow_ = r;
    std::map<int, std::vector<Step>> bodies;
    for (int c : used_) redirect_[c] = &bodies[c];
    Cycle end = r;
    for (const auto& b : s.body) {
      gate(b, index);
      end = std::max(end, ops_.back().start + ops_.back().duration);
    }
    redirect_.clear();
    for (int c : used_) {
      Step st;
      st.kind = Step::Kind::kLockIf;
      st.time = p;
      st.recvs = recvs;
      st.arrivals = arrivals;
      st.cond = index;
      st.recv_anchor = anchor;
      st.pred_addrs = pred_addrs(s.pred);
      st.negate = s.pred.negate;
      st.region = r;
      st.reserved = end - r;
      st.body = std::move(bodies[c]);
      place(c, std::move(st));
      last_start_[c] = end;
    }
    flow_ = end;
  }

  void finish() {
    if (plan_.repeat == 0) return;
    plan_.participants.assign(used_.begin(), used_.end());
    if (lockstep()) {
      Cycle e = flow_;
      for (Cycle r : ready_) e = std::max(e, r);
      for (int c : used_) e = std::max(e, last_start_[c]);
      int drains = 0;
      Cycle at = 0;
      for (const auto& b : bcast_) {
        if (received_.count(b.first.meas)) continue;
        ++drains;
        at = std::max(at, b.second + cfg(*used_.begin()).recv_anchor);
      }
      if (drains > 0) e = std::max(e, at + 4 * cfg(*used_.begin()).pipeline_ratio);
      for (int c : used_) {
        if (drains > 0) {
          Step d;
          d.kind = Step::Kind::kDrain;
          d.time = at;
          d.source = isa::kCentralAddr;
          d.drains = drains;
          place(c, std::move(d));
        }
        plan_.busy_end[c] = e;
      }
      return;
    }
    int router = -1;
    for (int c : used_) {
      if (router < 0) router = topo_.parent.at(c).parent;
      while (!topo_.is_ancestor(router, c)) router = topo_.parent.at(router).parent;
    }
    plan_.region_router = router;
    SyncPoint sp;
    sp.kind = SyncNeed::kRegion;
    sp.controllers = plan_.participants;
    sp.target = router;
    syncs_.insert(syncs_.begin(), sp);
    for (int c : used_) {
      Cycle e = std::max(floor_[c], last_start_[c]);
      for (std::size_t q = 0; q < ir_.qubits.size(); ++q) {
        if (ctrl(ir_.qubits[q]) == c) e = std::max(e, ready_[q]);
      }
      auto& caps = captures_[c];
      if (drained_[c] < caps.size()) {
        Step d;
        d.kind = Step::Kind::kDrain;
        d.source = c;
        d.drains = static_cast<int>(caps.size() - drained_[c]);
        d.time = anchor_global(c, caps.back().end, cfg(c).recv_anchor);
        e = std::max(e, d.time + 4 * cfg(c).pipeline_ratio);
        place(c, std::move(d));
      }
      plan_.busy_end[c] = e;
    }
  }

  const CircuitIR& ir_;
  const MappingConfig& map_;
  const CompileOptions& opt_;
  const fabric::Topology& topo_;
  bool sync_;
  const Tuning& tune_;

  std::vector<const Stmt*> stmts_;
  std::set<int> used_;
  Cycle d1_ = 0, d2_ = 0, dm_ = 0;
  std::vector<Cycle> ready_;
  std::map<int, Cycle> floor_, seg_, last_start_, region_;
  std::map<int, int> domain_;
  std::map<int, std::vector<std::pair<Cycle, Cycle>>> windows_;  // pause [point, resume)
  int next_domain_ = 1;
  Cycle flow_ = 0;

  std::map<int, std::set<int>> consumers_;  // measurement -> controllers
  std::map<int, int> bit_meas_;             // bit -> latest measurement
  std::map<int, int> meas_ctrl_;
  int meas_count_ = 0;
  int cond_count_ = 0;
  std::map<int, std::vector<Capture>> captures_;
  std::map<int, std::size_t> drained_;
  std::map<std::pair<int, int>, std::deque<Datum>> channel_;
  std::map<int, std::map<int, Avail>> avail_;  // controller -> bit -> availability
  std::vector<std::pair<Capture, Cycle>> bcast_;  // lock-step: capture, arrival
  std::set<int> received_;

  std::map<int, std::vector<Step>*> redirect_;
  std::size_t seq_ = 0;
  std::vector<ScheduledOp> ops_;
  std::vector<SyncPoint> syncs_;
  std::vector<std::string> diags_;
  Plan plan_;
};

}  // namespace

namespace {

Schedule settle(const CircuitIR& ir, const MappingConfig& mapping, const CompileOptions& options, bool with_sync) {
  Tuning tuning;
  for (int round = 0; round < 64; ++round) {
    Schedule s = Engine(ir, mapping, options, with_sync, tuning).run();
    Tuning more = check_pipeline(s);
    bool changed = !more.extra_pad.empty() || !more.op_delay.empty() || !more.sync_delay.empty();
    for (const auto& [k, v] : more.depart_delay) {
      Cycle& d = tuning.depart_delay[k];
      Cycle next = std::max<Cycle>(0, d + v);
      changed = changed || next != d;
      d = next;
    }
    if (!changed) return s;
    for (const auto& [k, v] : more.extra_pad) tuning.extra_pad[k] += v;
    for (const auto& [k, v] : more.op_delay) tuning.op_delay[k] += v;
    for (const auto& [k, v] : more.sync_delay) tuning.sync_delay[k] += v;
  }
  throw Error(ErrorKind::kCompile, "internal: pipeline timing did not settle");
}

}  // namespace

Schedule schedule(const CircuitIR& ir, const MappingConfig& mapping, const CompileOptions& options) {
  return settle(ir, mapping, options, false);
}

Schedule insert_sync(const Schedule& sched) { return settle(sched.ir, sched.mapping, sched.options, true); }

}  // namespace dhisq::dqcc
