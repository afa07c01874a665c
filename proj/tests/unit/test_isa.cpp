#include <random>

#include "dhisq/error.hpp"
#include "dhisq/isa.hpp"
#include "doctest.h"

using namespace dhisq;
using namespace dhisq::isa;

namespace {

Instruction random_instruction(std::mt19937& rng, std::size_t size) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto r = [&] { return static_cast<std::uint8_t>(pick(0, 31)); };
  Instruction inst;
  inst.op = static_cast<Opcode>(pick(0, static_cast<int>(Opcode::kRecv)));
  switch (inst.op) {
    case Opcode::kLui: case Opcode::kAuipc:
      inst.rd = r();
      inst.imm = pick(0, 0xfffff);
      break;
    case Opcode::kJal:
      inst.rd = r();
      inst.imm = pick(0, static_cast<int>(size));
      break;
    case Opcode::kBeq: case Opcode::kBne: case Opcode::kBlt:
    case Opcode::kBge: case Opcode::kBltu: case Opcode::kBgeu:
      inst.rs1 = r();
      inst.rs2 = r();
      inst.imm = pick(0, static_cast<int>(size));
      break;
    case Opcode::kJalr: case Opcode::kLb: case Opcode::kLh: case Opcode::kLw:
    case Opcode::kLbu: case Opcode::kLhu:
      inst.rd = r();
      inst.rs1 = r();
      inst.imm = pick(-2048, 2047);
      break;
    case Opcode::kSb: case Opcode::kSh: case Opcode::kSw:
      inst.rs1 = r();
      inst.rs2 = r();
      inst.imm = pick(-2048, 2047);
      break;
    case Opcode::kSlli: case Opcode::kSrli: case Opcode::kSrai:
      inst.rd = r();
      inst.rs1 = r();
      inst.imm = pick(0, 31);
      break;
    case Opcode::kAddi: case Opcode::kSlti: case Opcode::kSltiu:
    case Opcode::kXori: case Opcode::kOri: case Opcode::kAndi:
      inst.rd = r();
      inst.rs1 = r();
      inst.imm = pick(-2048, 2047);
      break;
    case Opcode::kWaitI:
      inst.imm = pick(0, (1 << 22) - 1);
      break;
    case Opcode::kWaitR:
      inst.rs1 = r();
      break;
    case Opcode::kCwII:
      inst.imm = pick(0, 127);
      inst.codeword = static_cast<std::uint32_t>(pick(0, 0xffff));
      break;
    case Opcode::kCwIR:
      inst.imm = pick(0, 255);
      inst.rs2 = r();
      break;
    case Opcode::kCwRI:
      inst.rs1 = r();
      inst.codeword = static_cast<std::uint32_t>(pick(0, 0xffff));
      break;
    case Opcode::kCwRR:
      inst.rs1 = r();
      inst.rs2 = r();
      break;
    case Opcode::kSync:
      inst.imm = pick(0, 1) ? pick(0, 254) : pick(256, 0xfff);
      break;
    case Opcode::kSend:
      inst.imm = pick(0, 255);
      inst.rs1 = r();
      break;
    case Opcode::kRecv:
      inst.rd = r();
      inst.imm = pick(0, 1) ? kAnySource : pick(0, 255);
      break;
    default:  // R-type ALU
      inst.rd = r();
      inst.rs1 = r();
      inst.rs2 = r();
      break;
  }
  return inst;
}

Program random_program(std::mt19937& rng) {
  Program p;
  std::size_t n = std::uniform_int_distribution<std::size_t>(0, 40)(rng);
  for (std::size_t i = 0; i < n; ++i) p.code.push_back(random_instruction(rng, n));
  return p;
}

}  // namespace

TEST_CASE("cw.i.i with immediate port and codeword") {
  auto p = assemble("cw.i.i 1, 1");
  REQUIRE(p.code.size() == 1);
  CHECK(p.code[0].op == Opcode::kCwII);
  CHECK(p.code[0].imm == 1);
  CHECK(p.code[0].codeword == 1);
}

TEST_CASE("waiti 0 is a legal zero-length wait") {
  auto p = assemble("waiti 0");
  REQUIRE(p.code.size() == 1);
  CHECK(p.code[0].op == Opcode::kWaitI);
  CHECK(p.code[0].imm == 0);
}

TEST_CASE("cw.i.r disassembles with a register codeword") {
  Program p;
  p.code.push_back({Opcode::kCwIR, 0, 0, 3, 3});
  CHECK(disassemble(p) == "  cw.i.r 3, r3\n");
}

TEST_CASE("empty program disassembles to empty text") {
  CHECK(disassemble(Program{}).empty());
  CHECK(assemble("").code.empty());
}

TEST_CASE("register spellings") {
  auto p = assemble("add x1, $2, sp\nwaitr $1\nmv a0, t6");
  CHECK(p.code[0].rd == 1);
  CHECK(p.code[0].rs1 == 2);
  CHECK(p.code[0].rs2 == 2);
  CHECK(p.code[1].rs1 == 1);
  CHECK(p.code[2].rd == 10);
  CHECK(p.code[2].rs1 == 31);
}

TEST_CASE("labels may be used before definition") {
  auto p = assemble("  j end\n  addi r1, r1, 1\nend:\n  waiti 3\n");
  CHECK(p.code[0].op == Opcode::kJal);
  CHECK(p.code[0].imm == 2);
  CHECK(p.labels.at("end") == 2);
}

TEST_CASE("loads and stores use offset(base)") {
  auto p = assemble("lw r1, 8(r2)\nsw r3, -4(r4)\nlb r5, (r6)");
  CHECK(p.code[0].imm == 8);
  CHECK(p.code[0].rs1 == 2);
  CHECK(p.code[1].rs2 == 3);
  CHECK(p.code[1].imm == -4);
  CHECK(p.code[2].imm == 0);
  CHECK(disassemble(p) == "  lw r1, 8(r2)\n  sw r3, -4(r4)\n  lb r5, 0(r6)\n");
}

TEST_CASE("annotations round-trip") {
  auto p = assemble("cw.i.i 0, 5  # @x@q0\nsync 3 # plain comment\n");
  REQUIRE(p.annotation(0));
  CHECK(*p.annotation(0) == "x@q0");
  CHECK_FALSE(p.annotation(1));
  auto again = assemble(disassemble(p));
  CHECK(again == p);
  CHECK(*again.annotation(0) == "x@q0");
}

TEST_CASE("node directive") {
  auto p = assemble(".node 7\nwaiti 1");
  CHECK(p.node == 7);
  CHECK(p.code.size() == 1);
  CHECK(assemble(disassemble(p)) == p);
}

TEST_CASE("syntax errors carry line and column") {
  try {
    assemble("waiti 1\n  addi r1, r2, 5000\n");
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 16);
    CHECK(e.kind() == ErrorKind::kSyntax);
  }
  CHECK_THROWS_AS(assemble("frob r1"), SyntaxError);
  CHECK_THROWS_AS(assemble("beq r1, r2, nowhere"), SyntaxError);
  CHECK_THROWS_AS(assemble("a:\na:\nwaiti 1"), SyntaxError);
  CHECK_THROWS_AS(assemble("add r1, r2"), SyntaxError);
  CHECK_THROWS_AS(assemble("add r1, r2, r32"), SyntaxError);
  CHECK_THROWS_AS(assemble("waiti -1"), SyntaxError);
  CHECK_THROWS_AS(assemble("cw.i.i 256, 1"), SyntaxError);
  CHECK_THROWS_AS(assemble("cw.i.i 1, 65536"), SyntaxError);
  CHECK_THROWS_AS(assemble("sync 255"), SyntaxError);
}

TEST_CASE("interrupt, fence and CSR mnemonics are rejected") {
  for (const char* text : {"fence", "fence.i", "ecall", "ebreak", "mret", "wfi", "csrrw r1, 0, r2"}) {
    CHECK_THROWS_AS(assemble(text), SyntaxError);
  }
}

TEST_CASE("configurable codeword and port widths") {
  EncodingLimits narrow{8, 4};
  CHECK_THROWS_AS(assemble("cw.i.i 1, 256", narrow), SyntaxError);
  CHECK_THROWS_AS(assemble("cw.i.i 16, 1", narrow), SyntaxError);
  CHECK_NOTHROW(assemble("cw.i.i 15, 255", narrow));
}

TEST_CASE("two-board listing mnemonics assemble") {
  const char* text = R"(
    addi $1, $0, 0
  loop:
    waitr $1
    cw.i.i 0, 1
    sync 1
    waiti 20
    addi $1, $1, 30
    bne $1, $2, loop
    jal r0, loop
  )";
  auto p = assemble(text);
  CHECK(p.code.size() == 8);
  CHECK(assemble(disassemble(p)) == p);
}

TEST_CASE("waiti 57 encodes into the wait opcode") {
  Program p = assemble("waiti 57");
  Word w = encode_instruction(p.code[0], 0);
  CHECK((w & 0x7f) == 0x2b);
  CHECK(((w >> 12) & 7) == 0);
  CHECK(((w & 0xf80) >> 7 | (w >> 15) << 5) == 57);
  CHECK(decode_instruction(w, 0) == p.code[0]);
}

TEST_CASE("RV32I words match the standard encoding") {
  // reference words from the RISC-V specification encoding tables
  CHECK(encode_instruction(assemble("addi r1, r0, 5").code[0], 0) == 0x00500093u);
  CHECK(encode_instruction(assemble("add r3, r1, r2").code[0], 0) == 0x002081b3u);
  CHECK(encode_instruction(assemble("sub r3, r1, r2").code[0], 0) == 0x402081b3u);
  CHECK(encode_instruction(assemble("lw r1, 8(r2)").code[0], 0) == 0x00812083u);
  CHECK(encode_instruction(assemble("sw r1, 8(r2)").code[0], 0) == 0x00112423u);
  CHECK(encode_instruction(assemble("lui r5, 74565").code[0], 0) == 0x123452b7u);
  CHECK(encode_instruction(assemble("srai r1, r1, 3").code[0], 0) == 0x4030d093u);
  // branch back by one instruction: offset -4
  auto loop = assemble("x: addi r1, r1, 1\nbne r1, r2, x");
  CHECK(encode_instruction(loop.code[1], 1) == 0xfe209ee3u);
}

TEST_CASE("encoding overflow is reported") {
  Program p;
  p.code.push_back({Opcode::kCwII, 0, 0, 0, 200, 1});  // port needs 8 bits, field has 7
  CHECK_THROWS_AS(encode(p), Error);
  p.code[0] = {Opcode::kWaitI, 0, 0, 0, 1 << 22};
  CHECK_THROWS_AS(encode(p), Error);
  CHECK_THROWS_AS(decode(std::vector<std::uint8_t>{1, 2, 3}), Error);
  CHECK_THROWS_AS(decode(std::vector<std::uint8_t>{0x73, 0, 0, 0}), Error);  // ecall
}

TEST_CASE("x0 reads decode to register 0") {
  auto p = assemble("add r1, r0, r0\ncw.r.r r0, zero");
  auto q = decode(encode(p));
  CHECK(q.code[0].rs1 == 0);
  CHECK(q.code[0].rs2 == 0);
  CHECK(q.code[1].rs1 == 0);
}

TEST_CASE("property: text and binary round-trips on random programs") {
  std::mt19937 rng(20240611);
  for (int trial = 0; trial < 500; ++trial) {
    Program p = random_program(rng);
    std::string text = disassemble(p);
    Program back = assemble(text);
    REQUIRE_MESSAGE(back == p, text);
    CHECK(disassemble(back) == text);
    CHECK(decode(encode(p)) == p);
  }
}
