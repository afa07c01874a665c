#pragma once

// HISQ instruction set: an RV32I subset (no interrupts, fences or CSRs)
// extended with timing (waiti/waitr), codeword (cw.x.x), synchronization
// (sync) and messaging (send/recv) instructions.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dhisq::isa {

using Word = std::uint32_t;

constexpr std::size_t kNumRegisters = 32;

// Sync / send target address space. Values below kRouterAddrBase name a
// controller, values at or above it name router (kRouterAddrBase + index).
constexpr int kRouterAddrBase = 256;
// Controller ids are limited to [0, kMaxControllerId]; 255 is the central
// controller of the lock-step baseline (broadcast source / target).
constexpr int kMaxControllerId = 254;
constexpr int kCentralAddr = 255;
// recv without a source operand takes the earliest datum from any source.
constexpr int kAnySource = -1;

constexpr int kDefaultCodewordBits = 16;
constexpr int kDefaultPortBits = 8;

enum class Opcode : std::uint8_t {
  // RV32I subset
  kLui, kAuipc, kJal, kJalr,
  kBeq, kBne, kBlt, kBge, kBltu, kBgeu,
  kLb, kLh, kLw, kLbu, kLhu,
  kSb, kSh, kSw,
  kAddi, kSlti, kSltiu, kXori, kOri, kAndi, kSlli, kSrli, kSrai,
  kAdd, kSub, kSll, kSlt, kSltu, kXor, kSrl, kSra, kOr, kAnd,
  // quantum-control extensions
  kWaitI, kWaitR,
  kCwII, kCwIR, kCwRI, kCwRR,
  kSync,
  kSend, kRecv,
};

std::string_view mnemonic(Opcode op);
std::optional<Opcode> opcode_from_mnemonic(std::string_view text);

bool is_branch(Opcode op);
bool is_load(Opcode op);
bool is_store(Opcode op);
bool is_codeword(Opcode op);

/// One decoded instruction. Field use depends on the opcode:
///  - branches / jal: `imm` is the absolute target instruction index
///  - cw.i.*: `imm` is the port; cw.*.i: `codeword` is the codeword
///  - cw.r.*: `rs1` holds the port; cw.*.r: `rs2` holds the codeword
///  - sync/send: `imm` is the target address; recv: `imm` is the source or
///    kAnySource
///  - lui/auipc: `imm` is the 20-bit upper immediate
struct Instruction {
  Opcode op = Opcode::kAddi;
  std::uint8_t rd = 0;
  std::uint8_t rs1 = 0;
  std::uint8_t rs2 = 0;
  std::int32_t imm = 0;
  std::uint32_t codeword = 0;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

/// Per-controller HISQ program.
struct Program {
  std::vector<Instruction> code;
  std::map<std::string, std::size_t> labels;          // name -> index
  std::map<std::size_t, std::string> annotations;     // index -> label text
  std::optional<int> node;                            // `.node N`

  const std::string* annotation(std::size_t index) const;

  // Structural equality: instructions and node assignment. Symbol names and
  // annotations are presentation metadata.
  friend bool operator==(const Program& a, const Program& b) {
    return a.code == b.code && a.node == b.node;
  }
};

struct EncodingLimits {
  int codeword_bits = kDefaultCodewordBits;
  int port_bits = kDefaultPortBits;
};

/// Two-pass assembler. Throws SyntaxError on any malformed input.
Program assemble(std::string_view source, const EncodingLimits& limits = {});

/// Canonical text; assemble(disassemble(p)) == p.
std::string disassemble(const Program& program);

std::string format_instruction(const Instruction& inst,
                               const std::map<std::size_t, std::string>& names);

/// Flat little-endian binary (one 32-bit word per instruction).
std::vector<std::uint8_t> encode(const Program& program);
Program decode(std::span<const std::uint8_t> bytes);

Word encode_instruction(const Instruction& inst, std::size_t index);
Instruction decode_instruction(Word word, std::size_t index);

}  // namespace dhisq::isa
