#include <cstdio>

#include "dhisq/error.hpp"
#include "dhisq/isa.hpp"

// RV32I base encodings plus three custom opcode spaces:
//   custom-0 (0x0b)  cw.*      variant in bits [8:7]
//   custom-1 (0x2b)  waiti / waitr / sync, selected by funct3
//   custom-2 (0x5b)  send / recv, selected by funct3

namespace dhisq::isa {

namespace {

constexpr Word kOpLui = 0x37, kOpAuipc = 0x17, kOpJal = 0x6f, kOpJalr = 0x67;
constexpr Word kOpBranch = 0x63, kOpLoad = 0x03, kOpStore = 0x23;
constexpr Word kOpImm = 0x13, kOpReg = 0x33;
constexpr Word kOpCustom0 = 0x0b, kOpCustom1 = 0x2b, kOpCustom2 = 0x5b;

constexpr Word kAnySourceField = 0xfff;

[[noreturn]] void overflow(std::size_t index, const std::string& what) {
  throw Error(ErrorKind::kEncoding,
              "instruction " + std::to_string(index) + ": " + what + " does not fit its field");
}

Word bits(Word v, int hi, int lo) { return (v >> lo) & ((1u << (hi - lo + 1)) - 1); }

std::int32_t sign_extend(Word v, int width) {
  Word m = 1u << (width - 1);
  return static_cast<std::int32_t>((v ^ m) - m);
}

bool fits_signed(std::int64_t v, int width) {
  return v >= -(1LL << (width - 1)) && v < (1LL << (width - 1));
}

Word r_type(Word opcode, Word f3, Word f7, Word rd, Word rs1, Word rs2) {
  return opcode | rd << 7 | f3 << 12 | rs1 << 15 | rs2 << 20 | f7 << 25;
}

Word i_type(Word opcode, Word f3, Word rd, Word rs1, std::int32_t imm) {
  return opcode | rd << 7 | f3 << 12 | rs1 << 15 | (static_cast<Word>(imm) & 0xfff) << 20;
}

Word s_type(Word opcode, Word f3, Word rs1, Word rs2, std::int32_t imm) {
  Word u = static_cast<Word>(imm);
  return opcode | bits(u, 4, 0) << 7 | f3 << 12 | rs1 << 15 | rs2 << 20 | bits(u, 11, 5) << 25;
}

Word b_type(Word f3, Word rs1, Word rs2, std::int32_t offset) {
  Word u = static_cast<Word>(offset);
  return kOpBranch | bits(u, 11, 11) << 7 | bits(u, 4, 1) << 8 | f3 << 12 | rs1 << 15 |
         rs2 << 20 | bits(u, 10, 5) << 25 | bits(u, 12, 12) << 31;
}

Word j_type(Word rd, std::int32_t offset) {
  Word u = static_cast<Word>(offset);
  return kOpJal | rd << 7 | bits(u, 19, 12) << 12 | bits(u, 11, 11) << 20 |
         bits(u, 10, 1) << 21 | bits(u, 20, 20) << 31;
}

struct AluEntry {
  Opcode op;
  Word f3;
  Word f7;
};

constexpr AluEntry kRegOps[] = {
    {Opcode::kAdd, 0, 0x00}, {Opcode::kSub, 0, 0x20}, {Opcode::kSll, 1, 0x00},
    {Opcode::kSlt, 2, 0x00}, {Opcode::kSltu, 3, 0x00}, {Opcode::kXor, 4, 0x00},
    {Opcode::kSrl, 5, 0x00}, {Opcode::kSra, 5, 0x20}, {Opcode::kOr, 6, 0x00},
    {Opcode::kAnd, 7, 0x00},
};

constexpr AluEntry kImmOps[] = {
    {Opcode::kAddi, 0, 0}, {Opcode::kSlti, 2, 0}, {Opcode::kSltiu, 3, 0},
    {Opcode::kXori, 4, 0}, {Opcode::kOri, 6, 0},  {Opcode::kAndi, 7, 0},
    {Opcode::kSlli, 1, 0x00}, {Opcode::kSrli, 5, 0x00}, {Opcode::kSrai, 5, 0x20},
};

constexpr AluEntry kBranches[] = {
    {Opcode::kBeq, 0, 0}, {Opcode::kBne, 1, 0},  {Opcode::kBlt, 4, 0},
    {Opcode::kBge, 5, 0}, {Opcode::kBltu, 6, 0}, {Opcode::kBgeu, 7, 0},
};

constexpr AluEntry kLoads[] = {
    {Opcode::kLb, 0, 0}, {Opcode::kLh, 1, 0}, {Opcode::kLw, 2, 0},
    {Opcode::kLbu, 4, 0}, {Opcode::kLhu, 5, 0},
};

constexpr AluEntry kStores[] = {{Opcode::kSb, 0, 0}, {Opcode::kSh, 1, 0}, {Opcode::kSw, 2, 0}};

template <std::size_t N>
const AluEntry* find(const AluEntry (&table)[N], Opcode op) {
  for (const auto& e : table) {
    if (e.op == op) return &e;
  }
  return nullptr;
}

[[noreturn]] void bad_word(std::size_t index, Word word) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08x", word);
  throw Error(ErrorKind::kEncoding,
              "instruction " + std::to_string(index) + ": cannot decode word " + buf);
}

}  // namespace

Word encode_instruction(const Instruction& inst, std::size_t index) {
  auto offset = [&]() {
    return static_cast<std::int64_t>(inst.imm) * 4 - static_cast<std::int64_t>(index) * 4;
  };
  if (const auto* e = find(kRegOps, inst.op)) {
    return r_type(kOpReg, e->f3, e->f7, inst.rd, inst.rs1, inst.rs2);
  }
  if (const auto* e = find(kImmOps, inst.op)) {
    if (e->f3 == 1 || e->f3 == 5) {
      if (inst.imm < 0 || inst.imm > 31) overflow(index, "shift amount");
      return i_type(kOpImm, e->f3, inst.rd, inst.rs1, inst.imm | static_cast<int>(e->f7 << 5));
    }
    if (!fits_signed(inst.imm, 12)) overflow(index, "immediate");
    return i_type(kOpImm, e->f3, inst.rd, inst.rs1, inst.imm);
  }
  if (const auto* e = find(kBranches, inst.op)) {
    auto off = offset();
    if (!fits_signed(off, 13)) overflow(index, "branch offset");
    return b_type(e->f3, inst.rs1, inst.rs2, static_cast<std::int32_t>(off));
  }
  if (const auto* e = find(kLoads, inst.op)) {
    if (!fits_signed(inst.imm, 12)) overflow(index, "load offset");
    return i_type(kOpLoad, e->f3, inst.rd, inst.rs1, inst.imm);
  }
  if (const auto* e = find(kStores, inst.op)) {
    if (!fits_signed(inst.imm, 12)) overflow(index, "store offset");
    return s_type(kOpStore, e->f3, inst.rs1, inst.rs2, inst.imm);
  }
  Word u = static_cast<Word>(inst.imm);
  switch (inst.op) {
    case Opcode::kLui:
    case Opcode::kAuipc:
      if (inst.imm < 0 || inst.imm > 0xfffff) overflow(index, "upper immediate");
      return (inst.op == Opcode::kLui ? kOpLui : kOpAuipc) | Word{inst.rd} << 7 | u << 12;
    case Opcode::kJal: {
      auto off = offset();
      if (!fits_signed(off, 21)) overflow(index, "jump offset");
      return j_type(inst.rd, static_cast<std::int32_t>(off));
    }
    case Opcode::kJalr:
      if (!fits_signed(inst.imm, 12)) overflow(index, "jalr offset");
      return i_type(kOpJalr, 0, inst.rd, inst.rs1, inst.imm);
    case Opcode::kCwII:
      if (u > 0x7f) overflow(index, "cw.i.i port");
      if (inst.codeword > 0xffff) overflow(index, "codeword");
      return kOpCustom0 | 0u << 7 | u << 9 | inst.codeword << 16;
    case Opcode::kCwIR:
      if (u > 0xff) overflow(index, "cw.i.r port");
      return kOpCustom0 | 1u << 7 | u << 9 | Word{inst.rs2} << 20;
    case Opcode::kCwRI:
      if (inst.codeword > 0xffff) overflow(index, "codeword");
      return kOpCustom0 | 2u << 7 | Word{inst.rs1} << 9 | inst.codeword << 16;
    case Opcode::kCwRR:
      return kOpCustom0 | 3u << 7 | Word{inst.rs1} << 9 | Word{inst.rs2} << 14;
    case Opcode::kWaitI:
      if (inst.imm < 0 || inst.imm >= (1 << 22)) overflow(index, "wait immediate");
      return kOpCustom1 | bits(u, 4, 0) << 7 | 0u << 12 | bits(u, 21, 5) << 15;
    case Opcode::kWaitR:
      return kOpCustom1 | 1u << 12 | Word{inst.rs1} << 15;
    case Opcode::kSync:
      if (u > 0xfff) overflow(index, "sync target");
      return kOpCustom1 | 2u << 12 | u << 20;
    case Opcode::kSend:
      if (u > 0xfff) overflow(index, "send target");
      return kOpCustom2 | 0u << 12 | Word{inst.rs1} << 15 | u << 20;
    case Opcode::kRecv: {
      Word src = inst.imm == kAnySource ? kAnySourceField : u;
      if (src > 0xfff) overflow(index, "recv source");
      return kOpCustom2 | Word{inst.rd} << 7 | 1u << 12 | src << 20;
    }
    default:
      break;
  }
  overflow(index, "opcode");
}

Instruction decode_instruction(Word w, std::size_t index) {
  Word opcode = bits(w, 6, 0);
  auto rd = static_cast<std::uint8_t>(bits(w, 11, 7));
  auto rs1 = static_cast<std::uint8_t>(bits(w, 19, 15));
  auto rs2 = static_cast<std::uint8_t>(bits(w, 24, 20));
  Word f3 = bits(w, 14, 12);
  Word f7 = bits(w, 31, 25);
  std::int32_t imm_i = sign_extend(bits(w, 31, 20), 12);
  auto target = [&](std::int32_t offset) {
    if (offset % 4 != 0) bad_word(index, w);
    std::int64_t t = static_cast<std::int64_t>(index) + offset / 4;
    if (t < 0) bad_word(index, w);
    return static_cast<std::int32_t>(t);
  };
  switch (opcode) {
    case kOpReg:
      for (const auto& e : kRegOps) {
        if (e.f3 == f3 && e.f7 == f7) return {e.op, rd, rs1, rs2};
      }
      break;
    case kOpImm:
      for (const auto& e : kImmOps) {
        if (e.f3 != f3) continue;
        if (f3 == 1 || f3 == 5) {
          if (e.f7 == f7) return {e.op, rd, rs1, 0, static_cast<std::int32_t>(rs2)};
          continue;
        }
        return {e.op, rd, rs1, 0, imm_i};
      }
      break;
    case kOpBranch: {
      Word u = bits(w, 11, 8) << 1 | bits(w, 30, 25) << 5 | bits(w, 7, 7) << 11 |
               bits(w, 31, 31) << 12;
      for (const auto& e : kBranches) {
        if (e.f3 == f3) return {e.op, 0, rs1, rs2, target(sign_extend(u, 13))};
      }
      break;
    }
    case kOpLoad:
      for (const auto& e : kLoads) {
        if (e.f3 == f3) return {e.op, rd, rs1, 0, imm_i};
      }
      break;
    case kOpStore: {
      std::int32_t imm = sign_extend(bits(w, 11, 7) | bits(w, 31, 25) << 5, 12);
      for (const auto& e : kStores) {
        if (e.f3 == f3) return {e.op, 0, rs1, rs2, imm};
      }
      break;
    }
    case kOpLui:
    case kOpAuipc:
      return {opcode == kOpLui ? Opcode::kLui : Opcode::kAuipc, rd, 0, 0,
              static_cast<std::int32_t>(bits(w, 31, 12))};
    case kOpJal: {
      Word u = bits(w, 30, 21) << 1 | bits(w, 20, 20) << 11 | bits(w, 19, 12) << 12 |
               bits(w, 31, 31) << 20;
      return {Opcode::kJal, rd, 0, 0, target(sign_extend(u, 21))};
    }
    case kOpJalr:
      if (f3 == 0) return {Opcode::kJalr, rd, rs1, 0, imm_i};
      break;
    case kOpCustom0:
      switch (bits(w, 8, 7)) {
        case 0:
          return {Opcode::kCwII, 0, 0, 0, static_cast<std::int32_t>(bits(w, 15, 9)), bits(w, 31, 16)};
        case 1:
          return {Opcode::kCwIR, 0, 0, static_cast<std::uint8_t>(bits(w, 24, 20)),
                  static_cast<std::int32_t>(bits(w, 16, 9))};
        case 2:
          return {Opcode::kCwRI, 0, static_cast<std::uint8_t>(bits(w, 13, 9)), 0, 0, bits(w, 31, 16)};
        default:
          return {Opcode::kCwRR, 0, static_cast<std::uint8_t>(bits(w, 13, 9)),
                  static_cast<std::uint8_t>(bits(w, 18, 14))};
      }
    case kOpCustom1:
      if (f3 == 0) {
        return {Opcode::kWaitI, 0, 0, 0,
                static_cast<std::int32_t>(bits(w, 11, 7) | bits(w, 31, 15) << 5)};
      }
      if (f3 == 1) return {Opcode::kWaitR, 0, rs1};
      if (f3 == 2) return {Opcode::kSync, 0, 0, 0, static_cast<std::int32_t>(bits(w, 31, 20))};
      break;
    case kOpCustom2:
      if (f3 == 0) return {Opcode::kSend, 0, rs1, 0, static_cast<std::int32_t>(bits(w, 31, 20))};
      if (f3 == 1) {
        Word src = bits(w, 31, 20);
        return {Opcode::kRecv, rd, 0, 0,
                src == kAnySourceField ? kAnySource : static_cast<std::int32_t>(src)};
      }
      break;
    default:
      break;
  }
  bad_word(index, w);
}

std::vector<std::uint8_t> encode(const Program& program) {
  std::vector<std::uint8_t> out;
  out.reserve(program.code.size() * 4);
  for (std::size_t i = 0; i < program.code.size(); ++i) {
    Word w = encode_instruction(program.code[i], i);
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(w >> (8 * b)));
  }
  return out;
}

Program decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % 4 != 0) {
    throw Error(ErrorKind::kEncoding, "binary length is not a multiple of 4 bytes");
  }
  Program program;
  for (std::size_t i = 0; i * 4 < bytes.size(); ++i) {
    Word w = 0;
    for (int b = 0; b < 4; ++b) w |= Word{bytes[i * 4 + b]} << (8 * b);
    program.code.push_back(decode_instruction(w, i));
  }
  for (std::size_t i = 0; i < program.code.size(); ++i) {
    const auto& inst = program.code[i];
    if ((is_branch(inst.op) || inst.op == Opcode::kJal) &&
        static_cast<std::size_t>(inst.imm) > program.code.size()) {
      throw Error(ErrorKind::kEncoding, "instruction " + std::to_string(i) +
                                            ": branch target outside the program");
    }
  }
  return program;
}

}  // namespace dhisq::isa
