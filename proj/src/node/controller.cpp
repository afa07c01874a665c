#include <algorithm>
#include <cstdlib>
#include <tuple>

#include "dhisq/error.hpp"
#include "dhisq/node.hpp"

namespace dhisq::node {

using isa::Opcode;

std::string_view to_string(Stall stall) {
  switch (stall) {
    case Stall::kNone: return "running";
    case Stall::kSyncWait: return "sync-wait";
    case Stall::kRecvWait: return "recv-wait";
    case Stall::kQueueFull: return "queue-full";
    case Stall::kHalted: return "halted";
  }
  return "?";
}

namespace {

Cycle pad_from_annotation(const std::string* note) {
  if (!note) return 0;
  auto pos = note->find("pad=");
  if (pos == std::string::npos) return 0;
  return std::strtoll(note->c_str() + pos + 4, nullptr, 10);
}

}  // namespace

Controller::Controller(int id, const NodeConfig& config, isa::Program program,
                       const fabric::Topology* topology, OutcomeFn outcomes)
    : id_(id),
      config_(config),
      program_(std::move(program)),
      topology_(topology),
      outcomes_(std::move(outcomes)),
      memory_(config.memory_bytes, 0),
      queues_(static_cast<std::size_t>(config.ports)) {}

void Controller::fault(const std::string& msg) const {
  throw Error(ErrorKind::kRuntime, "controller " + std::to_string(id_) + " pc " +
                                       std::to_string(pc_) + ": " + msg);
}

std::size_t Controller::queued_events() const {
  std::size_t n = 0;
  for (const auto& q : queues_) n += q.size();
  return n;
}

bool Controller::done() const { return halted_ && queued_events() == 0 && syncs_.empty(); }

void Controller::deliver(const fabric::Message& msg, Cycle now) {
  switch (msg.kind) {
    case fabric::MsgKind::kSyncPulse: {
      bool& flag = flags_[msg.src];
      if (flag) ++overruns_;
      flag = true;
      break;
    }
    case fabric::MsgKind::kSyncGrant: {
      for (auto& rec : syncs_) {
        if (rec.mode == SyncMode::kRemote && rec.target == msg.group && rec.granted < 0) {
          rec.granted = msg.value;
          rec.grant_arrival = now;
          return;
        }
      }
      fault("sync grant without a pending request");
    }
    case fabric::MsgKind::kDatum:
      inbox_[msg.src].push_back({msg.arrival, local_, msg.src, msg.sent, msg.seq, msg.value});
      break;
    case fabric::MsgKind::kSyncRequest:
      fault("controller received a sync request");
  }
}

void Controller::tcu_tick(Cycle now, Outbox& out) {
  paused_ = false;
  while (!syncs_.empty()) {
    SyncRecord& head = syncs_.front();
    if (head.mode == SyncMode::kNearby && !head.pulse_sent && head.book_local == local_) {
      Cycle n = *topology_->mesh_latency(id_, head.target);
      fabric::Message pulse;
      pulse.kind = fabric::MsgKind::kSyncPulse;
      pulse.src = id_;
      pulse.from = id_;
      pulse.dst = head.target;
      pulse.sent = now;
      pulse.arrival = now + n;
      out.messages.push_back(pulse);
      head.pulse_sent = true;
      head.booked = now;
      head.proposed = now + (head.point_local - head.book_local);
    }
    if (head.point_local != local_) break;
    bool ready = false;
    if (head.mode == SyncMode::kNearby) {
      bool& flag = flags_[head.target];
      ready = flag;
      if (ready) flag = false;
    } else {
      ready = head.granted >= 0 && now >= head.granted;
    }
    if (!ready) {
      paused_ = true;
      break;
    }
    head.resolved = now;
    sync_log_.push_back(head);
    syncs_.pop_front();
  }
  if (paused_) {
    ++offset_;
    return;
  }
  for (std::size_t port = 0; port < queues_.size(); ++port) {
    auto& q = queues_[port];
    while (!q.empty() && q.front().stamp == local_) {
      const TimedEvent& ev = q.front();
      TraceRecord rec;
      rec.cycle = now + config_.output_delay;
      rec.node = id_;
      rec.port = ev.port;
      rec.codeword = ev.codeword;
      if (const auto* note = program_.annotation(ev.pc)) rec.label = *note;
      out.commits.push_back(rec);
      last_commit_ = rec.cycle;
      if (config_.capture_ports.count(ev.port)) {
        std::uint64_t k = capture_count_[ev.port]++;
        int bit = outcomes_ ? outcomes_(id_, ev.port, k) : 0;
        out.captures.push_back({rec.cycle + config_.capture_latency, ev.port, bit});
      }
      q.pop_front();
    }
    if (!q.empty() && q.front().stamp < local_) {
      fault("internal: missed event stamp " + std::to_string(q.front().stamp));
    }
  }
  ++local_;
}

bool Controller::runnable() const {
  if (halted_) return false;
  if (pc_ >= program_.code.size()) return true;
  const auto& inst = program_.code[pc_];
  switch (inst.op) {
    case Opcode::kRecv:
      if (inst.imm == isa::kAnySource) {
        return std::any_of(inbox_.begin(), inbox_.end(), [](const auto& kv) { return !kv.second.empty(); });
      } else {
        auto it = inbox_.find(inst.imm);
        return it != inbox_.end() && !it->second.empty();
      }
    case Opcode::kSync:
      if (inst.imm >= isa::kRouterAddrBase) return syncs_.empty();
      return syncs_.size() < static_cast<std::size_t>(config_.sync_queue_depth);
    case Opcode::kCwII: case Opcode::kCwIR: case Opcode::kCwRI: case Opcode::kCwRR: {
      std::uint32_t port = inst.op == Opcode::kCwII || inst.op == Opcode::kCwIR
                               ? static_cast<std::uint32_t>(inst.imm)
                               : regs_[inst.rs1];
      if (port >= queues_.size()) return true;  // faults when executed
      return queues_[port].size() < static_cast<std::size_t>(config_.queue_depth);
    }
    default:
      return true;
  }
}

std::optional<Cycle> Controller::next_tcu_activity(Cycle now) const {
  if (paused_) {
    const auto& head = syncs_.front();
    if (head.mode == SyncMode::kRemote && head.granted >= 0) return std::max(now + 1, head.granted);
    return std::nullopt;
  }
  std::optional<Cycle> best;
  auto consider = [&](Cycle local) {
    Cycle g = to_global(local);
    if (!best || g < *best) best = g;
  };
  for (const auto& q : queues_) {
    if (!q.empty()) consider(q.front().stamp);
  }
  if (!syncs_.empty()) {
    const auto& head = syncs_.front();
    consider(head.mode == SyncMode::kNearby && !head.pulse_sent ? head.book_local : head.point_local);
  }
  return best;
}

void Controller::step_pipeline(Cycle now, Outbox& out) {
  if (halted_) return;
  Cycle ratio = config_.pipeline_ratio;
  if (((now % ratio) + ratio) % ratio != 0) return;
  if (pc_ >= program_.code.size()) {
    halted_ = true;
    stall_ = Stall::kHalted;
    return;
  }
  execute(program_.code[pc_], now, out);
}

std::uint32_t Controller::load(std::uint32_t addr, int size, bool sign) const {
  if (static_cast<std::size_t>(addr) + size > memory_.size()) {
    fault("load address out of range: " + std::to_string(addr));
  }
  std::uint32_t v = 0;
  for (int i = 0; i < size; ++i) v |= std::uint32_t{memory_[addr + i]} << (8 * i);
  if (sign && size < 4) {
    std::uint32_t m = 1u << (8 * size - 1);
    v = (v ^ m) - m;
  }
  return v;
}

void Controller::store(std::uint32_t addr, int size, std::uint32_t value) {
  if (static_cast<std::size_t>(addr) + size > memory_.size()) {
    fault("store address out of range: " + std::to_string(addr));
  }
  for (int i = 0; i < size; ++i) memory_[addr + i] = static_cast<std::uint8_t>(value >> (8 * i));
}

bool Controller::try_recv(const isa::Instruction& inst, Cycle /*now*/) {
  std::deque<Datum>* fifo = nullptr;
  if (inst.imm == isa::kAnySource) {
    for (auto& [src, q] : inbox_) {
      if (q.empty()) continue;
      const Datum& d = q.front();
      if (!fifo) {
        fifo = &q;
        continue;
      }
      const Datum& b = fifo->front();
      if (std::tie(d.arrival, d.src, d.sent, d.seq) < std::tie(b.arrival, b.src, b.sent, b.seq)) fifo = &q;
    }
  } else {
    auto it = inbox_.find(inst.imm);
    if (it != inbox_.end() && !it->second.empty()) fifo = &it->second;
  }
  if (!fifo) return false;
  Datum d = fifo->front();
  fifo->pop_front();
  write(inst.rd, static_cast<std::uint32_t>(d.value));
  t_op_ = std::max(t_op_, d.arrival_local + config_.recv_anchor);
  return true;
}

void Controller::execute(const isa::Instruction& inst, Cycle now, Outbox& out) {
  std::size_t next = pc_ + 1;
  auto rs1 = regs_[inst.rs1];
  auto rs2 = regs_[inst.rs2];
  auto imm = static_cast<std::uint32_t>(inst.imm);
  auto branch = [&](bool taken) {
    if (taken) next = static_cast<std::size_t>(inst.imm);
  };
  auto jump_to_byte = [&](std::uint32_t target) {
    if (target % 4 != 0) fault("misaligned jump target " + std::to_string(target));
    next = target / 4;
  };

  switch (inst.op) {
    case Opcode::kLui: write(inst.rd, imm << 12); break;
    case Opcode::kAuipc: write(inst.rd, static_cast<std::uint32_t>(pc_ * 4) + (imm << 12)); break;
    case Opcode::kJal:
      write(inst.rd, static_cast<std::uint32_t>((pc_ + 1) * 4));
      next = static_cast<std::size_t>(inst.imm);
      break;
    case Opcode::kJalr: {
      std::uint32_t target = (rs1 + imm) & ~1u;
      write(inst.rd, static_cast<std::uint32_t>((pc_ + 1) * 4));
      jump_to_byte(target);
      break;
    }
    case Opcode::kBeq: branch(rs1 == rs2); break;
    case Opcode::kBne: branch(rs1 != rs2); break;
    case Opcode::kBlt: branch(static_cast<std::int32_t>(rs1) < static_cast<std::int32_t>(rs2)); break;
    case Opcode::kBge: branch(static_cast<std::int32_t>(rs1) >= static_cast<std::int32_t>(rs2)); break;
    case Opcode::kBltu: branch(rs1 < rs2); break;
    case Opcode::kBgeu: branch(rs1 >= rs2); break;
    case Opcode::kLb: write(inst.rd, load(rs1 + imm, 1, true)); break;
    case Opcode::kLh: write(inst.rd, load(rs1 + imm, 2, true)); break;
    case Opcode::kLw: write(inst.rd, load(rs1 + imm, 4, false)); break;
    case Opcode::kLbu: write(inst.rd, load(rs1 + imm, 1, false)); break;
    case Opcode::kLhu: write(inst.rd, load(rs1 + imm, 2, false)); break;
    case Opcode::kSb: store(rs1 + imm, 1, rs2); break;
    case Opcode::kSh: store(rs1 + imm, 2, rs2); break;
    case Opcode::kSw: store(rs1 + imm, 4, rs2); break;
    case Opcode::kAddi: write(inst.rd, rs1 + imm); break;
    case Opcode::kSlti: write(inst.rd, static_cast<std::int32_t>(rs1) < inst.imm); break;
    case Opcode::kSltiu: write(inst.rd, rs1 < imm); break;
    case Opcode::kXori: write(inst.rd, rs1 ^ imm); break;
    case Opcode::kOri: write(inst.rd, rs1 | imm); break;
    case Opcode::kAndi: write(inst.rd, rs1 & imm); break;
    case Opcode::kSlli: write(inst.rd, rs1 << (imm & 31)); break;
    case Opcode::kSrli: write(inst.rd, rs1 >> (imm & 31)); break;
    case Opcode::kSrai: write(inst.rd, static_cast<std::uint32_t>(static_cast<std::int32_t>(rs1) >> (imm & 31))); break;
    case Opcode::kAdd: write(inst.rd, rs1 + rs2); break;
    case Opcode::kSub: write(inst.rd, rs1 - rs2); break;
    case Opcode::kSll: write(inst.rd, rs1 << (rs2 & 31)); break;
    case Opcode::kSlt: write(inst.rd, static_cast<std::int32_t>(rs1) < static_cast<std::int32_t>(rs2)); break;
    case Opcode::kSltu: write(inst.rd, rs1 < rs2); break;
    case Opcode::kXor: write(inst.rd, rs1 ^ rs2); break;
    case Opcode::kSrl: write(inst.rd, rs1 >> (rs2 & 31)); break;
    case Opcode::kSra: write(inst.rd, static_cast<std::uint32_t>(static_cast<std::int32_t>(rs1) >> (rs2 & 31))); break;
    case Opcode::kOr: write(inst.rd, rs1 | rs2); break;
    case Opcode::kAnd: write(inst.rd, rs1 & rs2); break;

    case Opcode::kWaitI: t_op_ += inst.imm; break;
    case Opcode::kWaitR: t_op_ += rs1; break;

    case Opcode::kCwII: case Opcode::kCwIR: case Opcode::kCwRI: case Opcode::kCwRR: {
      bool port_imm = inst.op == Opcode::kCwII || inst.op == Opcode::kCwIR;
      bool cw_imm = inst.op == Opcode::kCwII || inst.op == Opcode::kCwRI;
      std::uint32_t port = port_imm ? imm : rs1;
      std::uint32_t cw = cw_imm ? inst.codeword : rs2;
      if (port >= queues_.size()) fault("port " + std::to_string(port) + " out of range");
      if (cw > 0xffffu) fault("codeword " + std::to_string(cw) + " wider than 16 bits");
      if (t_op_ < local_) {
        fault("timing violation: event stamp " + std::to_string(t_op_) + " is behind the timer " +
              std::to_string(local_));
      }
      auto& q = queues_[port];
      if (q.size() >= static_cast<std::size_t>(config_.queue_depth)) {
        stall_ = Stall::kQueueFull;
        return;
      }
      q.push_back({static_cast<int>(port), cw, t_op_, pc_});
      break;
    }

    case Opcode::kSync: {
      int tgt = inst.imm;
      Cycle pad = pad_from_annotation(program_.annotation(pc_));
      if (tgt < isa::kRouterAddrBase) {
        auto n = topology_->mesh_latency(id_, tgt);
        if (!n) fault("sync target " + std::to_string(tgt) + " is not a mesh neighbor");
        if (syncs_.size() >= static_cast<std::size_t>(config_.sync_queue_depth)) {
          stall_ = Stall::kSyncWait;
          return;
        }
        Cycle b = std::max(t_op_, local_);
        if (!syncs_.empty() && b < syncs_.back().point_local) {
          fault("sync booked at " + std::to_string(b) + " before the previous sync point " +
                std::to_string(syncs_.back().point_local));
        }
        SyncRecord rec;
        rec.mode = SyncMode::kNearby;
        rec.target = tgt;
        rec.book_local = b;
        rec.point_local = b + *n;
        rec.pad = pad;
        rec.pc = pc_;
        syncs_.push_back(rec);
        t_op_ = rec.point_local;
      } else {
        if (!topology_->routers.count(tgt) || !topology_->is_ancestor(tgt, id_)) {
          fault("sync target router " + std::to_string(tgt - isa::kRouterAddrBase) +
                " is not an ancestor");
        }
        auto members = topology_->participants(tgt);
        if (std::find(members.begin(), members.end(), id_) == members.end()) {
          fault("not a participant of the region sync on router " +
                std::to_string(tgt - isa::kRouterAddrBase));
        }
        if (!syncs_.empty()) {
          stall_ = Stall::kSyncWait;
          return;
        }
        Cycle s = std::max(t_op_, local_);
        const auto& edge = topology_->parent.at(id_);
        SyncRecord rec;
        rec.mode = SyncMode::kRemote;
        rec.target = tgt;
        rec.book_local = s;
        rec.point_local = s;
        rec.booked = now;
        rec.proposed = to_global(s);
        rec.pad = pad;
        rec.pc = pc_;
        syncs_.push_back(rec);
        fabric::Message req;
        req.kind = fabric::MsgKind::kSyncRequest;
        req.src = id_;
        req.from = id_;
        req.dst = edge.parent;
        req.group = tgt;
        req.sent = now;
        req.arrival = now + edge.up;
        req.value = rec.proposed;
        out.messages.push_back(req);
        t_op_ = s;
      }
      break;
    }

    case Opcode::kSend: {
      int tgt = inst.imm;
      if (!topology_->controllers.count(tgt)) fault("send target " + std::to_string(tgt) + " unknown");
      fabric::Message m;
      m.kind = fabric::MsgKind::kDatum;
      m.src = id_;
      m.from = id_;
      m.dst = tgt;
      m.sent = now;
      m.arrival = now + topology_->datum_latency(id_, tgt);
      m.value = rs1;
      out.messages.push_back(m);
      break;
    }

    case Opcode::kRecv:
      if (!try_recv(inst, now)) {
        stall_ = Stall::kRecvWait;
        return;
      }
      break;
  }
  stall_ = Stall::kNone;
  ++executed_;
  pc_ = next;
}

}  // namespace dhisq::node
