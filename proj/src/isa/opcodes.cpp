#include <array>
#include <utility>

#include "dhisq/isa.hpp"

namespace dhisq::isa {

namespace {

constexpr std::array<std::pair<Opcode, std::string_view>, 46> kMnemonics{{
    {Opcode::kLui, "lui"},     {Opcode::kAuipc, "auipc"}, {Opcode::kJal, "jal"},
    {Opcode::kJalr, "jalr"},   {Opcode::kBeq, "beq"},     {Opcode::kBne, "bne"},
    {Opcode::kBlt, "blt"},     {Opcode::kBge, "bge"},     {Opcode::kBltu, "bltu"},
    {Opcode::kBgeu, "bgeu"},   {Opcode::kLb, "lb"},       {Opcode::kLh, "lh"},
    {Opcode::kLw, "lw"},       {Opcode::kLbu, "lbu"},     {Opcode::kLhu, "lhu"},
    {Opcode::kSb, "sb"},       {Opcode::kSh, "sh"},       {Opcode::kSw, "sw"},
    {Opcode::kAddi, "addi"},   {Opcode::kSlti, "slti"},   {Opcode::kSltiu, "sltiu"},
    {Opcode::kXori, "xori"},   {Opcode::kOri, "ori"},     {Opcode::kAndi, "andi"},
    {Opcode::kSlli, "slli"},   {Opcode::kSrli, "srli"},   {Opcode::kSrai, "srai"},
    {Opcode::kAdd, "add"},     {Opcode::kSub, "sub"},     {Opcode::kSll, "sll"},
    {Opcode::kSlt, "slt"},     {Opcode::kSltu, "sltu"},   {Opcode::kXor, "xor"},
    {Opcode::kSrl, "srl"},     {Opcode::kSra, "sra"},     {Opcode::kOr, "or"},
    {Opcode::kAnd, "and"},     {Opcode::kWaitI, "waiti"}, {Opcode::kWaitR, "waitr"},
    {Opcode::kCwII, "cw.i.i"}, {Opcode::kCwIR, "cw.i.r"}, {Opcode::kCwRI, "cw.r.i"},
    {Opcode::kCwRR, "cw.r.r"}, {Opcode::kSync, "sync"},   {Opcode::kSend, "send"},
    {Opcode::kRecv, "recv"},
}};

}  // namespace

std::string_view mnemonic(Opcode op) {
  for (const auto& [code, text] : kMnemonics) {
    if (code == op) return text;
  }
  return "?";
}

std::optional<Opcode> opcode_from_mnemonic(std::string_view text) {
  for (const auto& [code, name] : kMnemonics) {
    if (name == text) return code;
  }
  return std::nullopt;
}

bool is_branch(Opcode op) {
  switch (op) {
    case Opcode::kBeq: case Opcode::kBne: case Opcode::kBlt:
    case Opcode::kBge: case Opcode::kBltu: case Opcode::kBgeu:
      return true;
    default:
      return false;
  }
}

bool is_load(Opcode op) {
  switch (op) {
    case Opcode::kLb: case Opcode::kLh: case Opcode::kLw:
    case Opcode::kLbu: case Opcode::kLhu:
      return true;
    default:
      return false;
  }
}

bool is_store(Opcode op) {
  return op == Opcode::kSb || op == Opcode::kSh || op == Opcode::kSw;
}

bool is_codeword(Opcode op) {
  return op == Opcode::kCwII || op == Opcode::kCwIR || op == Opcode::kCwRI ||
         op == Opcode::kCwRR;
}

const std::string* Program::annotation(std::size_t index) const {
  auto it = annotations.find(index);
  return it == annotations.end() ? nullptr : &it->second;
}

}  // namespace dhisq::isa
