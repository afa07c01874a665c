#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <set>
#include <sstream>

#include "dhisq/error.hpp"
#include "dhisq/isa.hpp"

namespace dhisq::isa {

namespace {

constexpr std::array<std::string_view, 32> kAbiNames{
    "zero", "ra", "sp",  "gp",  "tp", "t0", "t1", "t2", "s0", "s1", "a0",
    "a1",   "a2", "a3",  "a4",  "a5", "a6", "a7", "s2", "s3", "s4", "s5",
    "s6",   "s7", "s8",  "s9",  "s10", "s11", "t3", "t4", "t5", "t6"};

constexpr std::array<std::string_view, 6> kRejected{"fence", "fence.i", "ecall",
                                                    "ebreak", "mret", "wfi"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

struct Operand {
  std::string_view text;
  std::size_t column;  // 1-based
};

// One source line after lexing: labels, mnemonic, operands, annotation.
struct Line {
  std::size_t number = 0;
  std::vector<Operand> labels;
  Operand mnemonic{};
  std::vector<Operand> operands;
  std::optional<std::string> annotation;
};

class Assembler {
 public:
  Assembler(std::string_view source, const EncodingLimits& limits)
      : source_(source), limits_(limits) {}

  Program run() {
    lex();
    // pass 1: label addresses
    std::size_t index = 0;
    for (const auto& line : lines_) {
      for (const auto& label : line.labels) {
        std::string name(label.text);
        if (program_.labels.count(name)) {
          throw SyntaxError(line.number, label.column, "duplicate label '" + name + "'");
        }
        program_.labels[name] = index;
      }
      if (!line.mnemonic.text.empty() && line.mnemonic.text != ".node") ++index;
    }
    // pass 2: instructions
    for (const auto& line : lines_) {
      if (line.mnemonic.text.empty()) continue;
      if (line.mnemonic.text == ".node") {
        directive_node(line);
        continue;
      }
      if (line.annotation) program_.annotations[program_.code.size()] = *line.annotation;
      program_.code.push_back(parse_instruction(line));
    }
    return std::move(program_);
  }

 private:
  void lex() {
    std::size_t number = 0;
    std::size_t pos = 0;
    while (pos <= source_.size()) {
      std::size_t end = source_.find('\n', pos);
      if (end == std::string_view::npos) end = source_.size();
      ++number;
      lex_line(source_.substr(pos, end - pos), number);
      pos = end + 1;
    }
  }

  void lex_line(std::string_view raw, std::size_t number) {
    Line line;
    line.number = number;
    std::string_view text = raw;
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
    std::size_t hash = text.find('#');
    if (hash != std::string_view::npos) {
      std::string_view comment = trim(text.substr(hash + 1));
      if (!comment.empty() && comment.front() == '@') {
        line.annotation = std::string(trim(comment.substr(1)));
      }
      text = text.substr(0, hash);
    }
    std::size_t i = 0;
    auto skip_ws = [&] {
      while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    };
    // labels
    while (true) {
      skip_ws();
      std::size_t start = i;
      std::size_t j = i;
      if (j < text.size() && is_ident_start(text[j])) {
        while (j < text.size() && is_ident_char(text[j])) ++j;
        std::size_t k = j;
        while (k < text.size() && (text[k] == ' ' || text[k] == '\t')) ++k;
        if (k < text.size() && text[k] == ':') {
          line.labels.push_back({text.substr(start, j - start), start + 1});
          i = k + 1;
          continue;
        }
      }
      break;
    }
    skip_ws();
    if (i < text.size()) {
      std::size_t start = i;
      while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
      line.mnemonic = {text.substr(start, i - start), start + 1};
      skip_ws();
      if (i < text.size()) {
        std::size_t op_start = i;
        for (std::size_t k = i; k <= text.size(); ++k) {
          if (k == text.size() || text[k] == ',') {
            std::string_view piece = text.substr(op_start, k - op_start);
            std::size_t lead = 0;
            while (lead < piece.size() && std::isspace(static_cast<unsigned char>(piece[lead]))) ++lead;
            std::string_view op = trim(piece);
            if (op.empty()) throw SyntaxError(number, op_start + 1, "empty operand");
            line.operands.push_back({op, op_start + lead + 1});
            op_start = k + 1;
          }
        }
      }
    }
    if (line.annotation && line.mnemonic.text.empty()) line.annotation.reset();
    lines_.push_back(std::move(line));
  }

  void directive_node(const Line& line) {
    expect_count(line, 1);
    std::int64_t id = integer(line, line.operands[0]);
    if (id < 0 || id > kMaxControllerId) {
      throw SyntaxError(line.number, line.operands[0].column, "node id out of range");
    }
    program_.node = static_cast<int>(id);
  }

  [[noreturn]] void fail(const Line& line, const Operand& at, const std::string& msg) const {
    throw SyntaxError(line.number, at.column, msg);
  }

  void expect_count(const Line& line, std::size_t n) const {
    if (line.operands.size() != n) {
      fail(line, line.mnemonic,
           "'" + std::string(line.mnemonic.text) + "' expects " + std::to_string(n) +
               " operand(s), got " + std::to_string(line.operands.size()));
    }
  }

  static std::optional<std::int64_t> parse_int(std::string_view s) {
    bool neg = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
      neg = s.front() == '-';
      s.remove_prefix(1);
    }
    int base = 10;
    if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
      base = 16;
      s.remove_prefix(2);
    } else if (s.size() > 2 && s[0] == '0' && (s[1] == 'b' || s[1] == 'B')) {
      base = 2;
      s.remove_prefix(2);
    }
    if (s.empty()) return std::nullopt;
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value, base);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return neg ? -value : value;
  }

  std::int64_t integer(const Line& line, const Operand& op) const {
    auto v = parse_int(op.text);
    if (!v) fail(line, op, "expected integer, got '" + std::string(op.text) + "'");
    return *v;
  }

  std::int64_t ranged(const Line& line, const Operand& op, std::int64_t lo, std::int64_t hi) const {
    std::int64_t v = integer(line, op);
    if (v < lo || v > hi) {
      fail(line, op, "operand " + std::to_string(v) + " out of range [" + std::to_string(lo) +
                         ", " + std::to_string(hi) + "]");
    }
    return v;
  }

  static std::optional<std::uint8_t> parse_register(std::string_view s) {
    if (s.size() >= 2 && (s[0] == 'r' || s[0] == 'x' || s[0] == '$')) {
      auto v = parse_int(s.substr(1));
      if (v && *v >= 0 && *v < static_cast<std::int64_t>(kNumRegisters) &&
          std::all_of(s.begin() + 1, s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        return static_cast<std::uint8_t>(*v);
      }
    }
    for (std::size_t i = 0; i < kAbiNames.size(); ++i) {
      if (kAbiNames[i] == s) return static_cast<std::uint8_t>(i);
    }
    if (s == "fp") return 8;
    return std::nullopt;
  }

  std::uint8_t reg(const Line& line, const Operand& op) const {
    auto r = parse_register(op.text);
    if (!r) fail(line, op, "expected register, got '" + std::string(op.text) + "'");
    return *r;
  }

  std::int32_t target(const Line& line, const Operand& op) const {
    auto it = program_.labels.find(std::string(op.text));
    if (it == program_.labels.end()) {
      if (parse_int(op.text)) fail(line, op, "branch targets must be labels");
      fail(line, op, "undefined label '" + std::string(op.text) + "'");
    }
    return static_cast<std::int32_t>(it->second);
  }

  // "imm(reg)" memory operand
  std::pair<std::int32_t, std::uint8_t> memory(const Line& line, const Operand& op) const {
    std::size_t open = op.text.find('(');
    if (open == std::string_view::npos || op.text.back() != ')') {
      fail(line, op, "expected offset(register), got '" + std::string(op.text) + "'");
    }
    std::string_view off = trim(op.text.substr(0, open));
    std::string_view base = trim(op.text.substr(open + 1, op.text.size() - open - 2));
    std::int64_t offset = 0;
    if (!off.empty()) {
      auto v = parse_int(off);
      if (!v) fail(line, op, "bad memory offset '" + std::string(off) + "'");
      offset = *v;
    }
    if (offset < -2048 || offset > 2047) fail(line, op, "memory offset out of 12-bit range");
    auto r = parse_register(base);
    if (!r) fail(line, op, "bad base register '" + std::string(base) + "'");
    return {static_cast<std::int32_t>(offset), *r};
  }

  std::int32_t port(const Line& line, const Operand& op) const {
    return static_cast<std::int32_t>(ranged(line, op, 0, (1LL << limits_.port_bits) - 1));
  }

  std::uint32_t codeword(const Line& line, const Operand& op) const {
    return static_cast<std::uint32_t>(ranged(line, op, 0, (1LL << limits_.codeword_bits) - 1));
  }

  Instruction parse_instruction(const Line& line) {
    std::string_view m = line.mnemonic.text;
    const auto& ops = line.operands;
    for (auto bad : kRejected) {
      if (m == bad) fail(line, line.mnemonic, "'" + std::string(m) + "' is not supported by HISQ");
    }
    if (m.substr(0, 3) == "csr") fail(line, line.mnemonic, "CSR instructions are not supported");

    // pseudo-instructions
    if (m == "nop") {
      expect_count(line, 0);
      return {Opcode::kAddi};
    }
    if (m == "mv") {
      expect_count(line, 2);
      return {Opcode::kAddi, reg(line, ops[0]), reg(line, ops[1])};
    }
    if (m == "li") {
      expect_count(line, 2);
      return {Opcode::kAddi, reg(line, ops[0]), 0, 0,
              static_cast<std::int32_t>(ranged(line, ops[1], -2048, 2047))};
    }
    if (m == "j") {
      expect_count(line, 1);
      return {Opcode::kJal, 0, 0, 0, target(line, ops[0])};
    }
    if (m == "jr") {
      expect_count(line, 1);
      return {Opcode::kJalr, 0, reg(line, ops[0])};
    }
    if (m == "ret") {
      expect_count(line, 0);
      return {Opcode::kJalr, 0, 1};
    }
    if (m == "beqz" || m == "bnez") {
      expect_count(line, 2);
      return {m == "beqz" ? Opcode::kBeq : Opcode::kBne, 0, reg(line, ops[0]), 0,
              target(line, ops[1])};
    }

    auto opcode = opcode_from_mnemonic(m);
    if (!opcode) fail(line, line.mnemonic, "unknown mnemonic '" + std::string(m) + "'");
    Instruction inst{*opcode};
    switch (*opcode) {
      case Opcode::kLui:
      case Opcode::kAuipc:
        expect_count(line, 2);
        inst.rd = reg(line, ops[0]);
        inst.imm = static_cast<std::int32_t>(ranged(line, ops[1], 0, 0xFFFFF));
        break;
      case Opcode::kJal:
        if (ops.size() == 1) {
          inst.rd = 1;
          inst.imm = target(line, ops[0]);
        } else {
          expect_count(line, 2);
          inst.rd = reg(line, ops[0]);
          inst.imm = target(line, ops[1]);
        }
        break;
      case Opcode::kJalr:
        if (ops.size() == 1) {
          inst.rd = 1;
          inst.rs1 = reg(line, ops[0]);
        } else if (ops.size() == 2) {
          inst.rd = reg(line, ops[0]);
          auto [off, base] = memory(line, ops[1]);
          inst.imm = off;
          inst.rs1 = base;
        } else {
          expect_count(line, 3);
          inst.rd = reg(line, ops[0]);
          inst.rs1 = reg(line, ops[1]);
          inst.imm = static_cast<std::int32_t>(ranged(line, ops[2], -2048, 2047));
        }
        break;
      case Opcode::kBeq: case Opcode::kBne: case Opcode::kBlt:
      case Opcode::kBge: case Opcode::kBltu: case Opcode::kBgeu:
        expect_count(line, 3);
        inst.rs1 = reg(line, ops[0]);
        inst.rs2 = reg(line, ops[1]);
        inst.imm = target(line, ops[2]);
        break;
      case Opcode::kLb: case Opcode::kLh: case Opcode::kLw:
      case Opcode::kLbu: case Opcode::kLhu: {
        expect_count(line, 2);
        inst.rd = reg(line, ops[0]);
        auto [off, base] = memory(line, ops[1]);
        inst.imm = off;
        inst.rs1 = base;
        break;
      }
      case Opcode::kSb: case Opcode::kSh: case Opcode::kSw: {
        expect_count(line, 2);
        inst.rs2 = reg(line, ops[0]);
        auto [off, base] = memory(line, ops[1]);
        inst.imm = off;
        inst.rs1 = base;
        break;
      }
      case Opcode::kSlli: case Opcode::kSrli: case Opcode::kSrai:
        expect_count(line, 3);
        inst.rd = reg(line, ops[0]);
        inst.rs1 = reg(line, ops[1]);
        inst.imm = static_cast<std::int32_t>(ranged(line, ops[2], 0, 31));
        break;
      case Opcode::kAddi: case Opcode::kSlti: case Opcode::kSltiu:
      case Opcode::kXori: case Opcode::kOri: case Opcode::kAndi:
        expect_count(line, 3);
        inst.rd = reg(line, ops[0]);
        inst.rs1 = reg(line, ops[1]);
        inst.imm = static_cast<std::int32_t>(ranged(line, ops[2], -2048, 2047));
        break;
      case Opcode::kAdd: case Opcode::kSub: case Opcode::kSll: case Opcode::kSlt:
      case Opcode::kSltu: case Opcode::kXor: case Opcode::kSrl: case Opcode::kSra:
      case Opcode::kOr: case Opcode::kAnd:
        expect_count(line, 3);
        inst.rd = reg(line, ops[0]);
        inst.rs1 = reg(line, ops[1]);
        inst.rs2 = reg(line, ops[2]);
        break;
      case Opcode::kWaitI:
        expect_count(line, 1);
        inst.imm = static_cast<std::int32_t>(ranged(line, ops[0], 0, 0x7FFFFFFF));
        break;
      case Opcode::kWaitR:
        expect_count(line, 1);
        inst.rs1 = reg(line, ops[0]);
        break;
      case Opcode::kCwII:
        expect_count(line, 2);
        inst.imm = port(line, ops[0]);
        inst.codeword = codeword(line, ops[1]);
        break;
      case Opcode::kCwIR:
        expect_count(line, 2);
        inst.imm = port(line, ops[0]);
        inst.rs2 = reg(line, ops[1]);
        break;
      case Opcode::kCwRI:
        expect_count(line, 2);
        inst.rs1 = reg(line, ops[0]);
        inst.codeword = codeword(line, ops[1]);
        break;
      case Opcode::kCwRR:
        expect_count(line, 2);
        inst.rs1 = reg(line, ops[0]);
        inst.rs2 = reg(line, ops[1]);
        break;
      case Opcode::kSync: {
        expect_count(line, 1);
        std::int64_t tgt = ranged(line, ops[0], 0, 0xFFF);
        if (tgt == kCentralAddr) fail(line, ops[0], "sync target 255 is reserved");
        inst.imm = static_cast<std::int32_t>(tgt);
        break;
      }
      case Opcode::kSend:
        expect_count(line, 2);
        inst.imm = static_cast<std::int32_t>(ranged(line, ops[0], 0, kCentralAddr));
        inst.rs1 = reg(line, ops[1]);
        break;
      case Opcode::kRecv:
        if (ops.size() == 1) {
          inst.rd = reg(line, ops[0]);
          inst.imm = kAnySource;
        } else {
          expect_count(line, 2);
          inst.rd = reg(line, ops[0]);
          inst.imm = static_cast<std::int32_t>(ranged(line, ops[1], 0, kCentralAddr));
        }
        break;
    }
    return inst;
  }

  std::string_view source_;
  EncodingLimits limits_;
  std::vector<Line> lines_;
  Program program_;
};

std::string r(std::uint8_t index) { return "r" + std::to_string(index); }

std::string target_name(std::int32_t index, const std::map<std::size_t, std::string>& names) {
  auto it = names.find(static_cast<std::size_t>(index));
  if (it != names.end()) return it->second;
  return "L" + std::to_string(index);
}

}  // namespace

Program assemble(std::string_view source, const EncodingLimits& limits) {
  return Assembler(source, limits).run();
}

std::string format_instruction(const Instruction& inst,
                               const std::map<std::size_t, std::string>& names) {
  std::string m(mnemonic(inst.op));
  auto imm = std::to_string(inst.imm);
  switch (inst.op) {
    case Opcode::kLui: case Opcode::kAuipc:
      return m + " " + r(inst.rd) + ", " + imm;
    case Opcode::kJal:
      return m + " " + r(inst.rd) + ", " + target_name(inst.imm, names);
    case Opcode::kJalr:
    case Opcode::kLb: case Opcode::kLh: case Opcode::kLw:
    case Opcode::kLbu: case Opcode::kLhu:
      return m + " " + r(inst.rd) + ", " + imm + "(" + r(inst.rs1) + ")";
    case Opcode::kSb: case Opcode::kSh: case Opcode::kSw:
      return m + " " + r(inst.rs2) + ", " + imm + "(" + r(inst.rs1) + ")";
    case Opcode::kBeq: case Opcode::kBne: case Opcode::kBlt:
    case Opcode::kBge: case Opcode::kBltu: case Opcode::kBgeu:
      return m + " " + r(inst.rs1) + ", " + r(inst.rs2) + ", " + target_name(inst.imm, names);
    case Opcode::kAddi: case Opcode::kSlti: case Opcode::kSltiu: case Opcode::kXori:
    case Opcode::kOri: case Opcode::kAndi: case Opcode::kSlli: case Opcode::kSrli:
    case Opcode::kSrai:
      return m + " " + r(inst.rd) + ", " + r(inst.rs1) + ", " + imm;
    case Opcode::kAdd: case Opcode::kSub: case Opcode::kSll: case Opcode::kSlt:
    case Opcode::kSltu: case Opcode::kXor: case Opcode::kSrl: case Opcode::kSra:
    case Opcode::kOr: case Opcode::kAnd:
      return m + " " + r(inst.rd) + ", " + r(inst.rs1) + ", " + r(inst.rs2);
    case Opcode::kWaitI:
      return m + " " + imm;
    case Opcode::kWaitR:
      return m + " " + r(inst.rs1);
    case Opcode::kCwII:
      return m + " " + imm + ", " + std::to_string(inst.codeword);
    case Opcode::kCwIR:
      return m + " " + imm + ", " + r(inst.rs2);
    case Opcode::kCwRI:
      return m + " " + r(inst.rs1) + ", " + std::to_string(inst.codeword);
    case Opcode::kCwRR:
      return m + " " + r(inst.rs1) + ", " + r(inst.rs2);
    case Opcode::kSync:
      return m + " " + imm;
    case Opcode::kSend:
      return m + " " + imm + ", " + r(inst.rs1);
    case Opcode::kRecv:
      if (inst.imm == kAnySource) return m + " " + r(inst.rd);
      return m + " " + r(inst.rd) + ", " + imm;
  }
  return m;
}

std::string disassemble(const Program& program) {
  // label names per index; every branch target needs one
  std::map<std::size_t, std::vector<std::string>> at;
  std::set<std::string> used;
  for (const auto& [name, index] : program.labels) {
    at[index].push_back(name);
    used.insert(name);
  }
  std::map<std::size_t, std::string> primary;
  for (const auto& [index, list] : at) primary[index] = list.front();
  for (const auto& inst : program.code) {
    if (!is_branch(inst.op) && inst.op != Opcode::kJal) continue;
    auto index = static_cast<std::size_t>(inst.imm);
    if (primary.count(index)) continue;
    std::string name = "L" + std::to_string(index);
    for (int k = 1; used.count(name); ++k) name = "L" + std::to_string(index) + "_" + std::to_string(k);
    used.insert(name);
    primary[index] = name;
    at[index].push_back(name);
  }

  std::ostringstream out;
  if (program.node) out << ".node " << *program.node << "\n";
  for (std::size_t i = 0; i <= program.code.size(); ++i) {
    auto it = at.find(i);
    if (it != at.end()) {
      for (const auto& name : it->second) out << name << ":\n";
    }
    if (i == program.code.size()) break;
    out << "  " << format_instruction(program.code[i], primary);
    if (const auto* note = program.annotation(i)) out << "  # @" << *note;
    out << "\n";
  }
  return out.str();
}

}  // namespace dhisq::isa
