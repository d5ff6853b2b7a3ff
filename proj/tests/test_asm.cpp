#include <gtest/gtest.h>

#include <random>

#include "leakcheck/asm.hpp"
#include "support/helpers.hpp"
#include "support/random_program.hpp"

using namespace leakcheck;

TEST(Asm, MovImmediate) {
  Program p = parse_program("mov r1, 5\nhalt\n");
  ASSERT_EQ(p.instructions.size(), 2u);
  const Instruction& i = p.instructions[0];
  EXPECT_EQ(i.mnemonic, Mnemonic::Mov);
  ASSERT_EQ(i.operands.size(), 2u);
  EXPECT_EQ(std::get<RegOperand>(i.operands[0]).reg, 1);
  EXPECT_EQ(std::get<ImmOperand>(i.operands[1]).value, 5u);
}

TEST(Asm, FullMemoryOperand) {
  Program p = parse_program("load r1, [r2 + r3*8 + 16], 8");
  const Instruction& i = p.instructions[0];
  EXPECT_EQ(i.mnemonic, Mnemonic::Load);
  EXPECT_EQ(i.access_size, 8);
  auto m = std::get<MemOperand>(i.operands[1]);
  EXPECT_EQ(m.base, 2);
  ASSERT_TRUE(m.index);
  EXPECT_EQ(*m.index, 3);
  EXPECT_EQ(m.scale, 8);
  EXPECT_EQ(m.offset, 16);
}

TEST(Asm, MemoryOperandVariants) {
  Program p = parse_program(
      "load r1, [r2], 1\n"
      "load r1, [r2 - 4], 2\n"
      "load r1, [r2 + r4], 4\n"
      "store [sp + 0x10], r1, 8\n");
  auto m0 = std::get<MemOperand>(p.instructions[0].operands[1]);
  EXPECT_FALSE(m0.index);
  EXPECT_EQ(m0.offset, 0);
  EXPECT_EQ(std::get<MemOperand>(p.instructions[1].operands[1]).offset, -4);
  auto m2 = std::get<MemOperand>(p.instructions[2].operands[1]);
  EXPECT_EQ(m2.scale, 1);
  EXPECT_EQ(*m2.index, 4);
  auto m3 = std::get<MemOperand>(p.instructions[3].operands[0]);
  EXPECT_EQ(m3.base, kStackPointer);
  EXPECT_EQ(m3.offset, 0x10);
}

TEST(Asm, UnknownMnemonic) {
  try {
    parse_program("bogus r1");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.message(), "unknown mnemonic 'bogus'");
    EXPECT_EQ(e.line(), 1u);
    EXPECT_EQ(e.column(), 1u);
  }
}

TEST(Asm, Diagnostics) {
  auto message = [](const char* src) {
    try {
      parse_program(src);
    } catch (const ParseError& e) {
      return std::to_string(e.line()) + ": " + e.message();
    }
    return std::string("no error");
  };
  EXPECT_EQ(message("halt\njmp nowhere\n"), "2: undefined label 'nowhere'");
  EXPECT_EQ(message("a:\na:\nhalt\n"), "2: duplicate label 'a' (first defined on line 1)");
  EXPECT_EQ(message("add r1, r2\n"), "1: 'add' takes 3 operand(s), got 2");
  EXPECT_EQ(message("load r1, [r2], 3\n"), "1: access size must be 1, 2, 4 or 8");
  EXPECT_EQ(message("load r1, [r2 + r3*3], 8\n"), "1: scale must be 1, 2, 4 or 8");
  EXPECT_EQ(message(""), "1: no entry instruction");
  EXPECT_EQ(message("; only a comment\n"), "1: no entry instruction");
}

TEST(Asm, AddressesAndLabels) {
  Program p = parse_program("start:\n  mov r1, 1\nnext: add r1, r1, 1\n  jmp start\n");
  EXPECT_EQ(p.address_of(2), 0x1008u);
  EXPECT_EQ(*p.label("start"), 0x1000u);
  EXPECT_EQ(*p.label("next"), 0x1004u);
  EXPECT_EQ(std::get<LabelOperand>(p.instructions[2].operands[0]).address, 0x1000u);
  EXPECT_EQ(p.fetch(0x1008), &p.instructions[2]);
  EXPECT_EQ(p.fetch(0x1002), nullptr);
  EXPECT_EQ(p.fetch(0x100c), nullptr);
}

TEST(Asm, EntryDirective) {
  Program p = parse_program(".entry main\nhelper: ret\nmain: halt\n");
  EXPECT_EQ(p.entry, 0x1004u);
}

TEST(Asm, HexImmediatesAndGroups) {
  Program p = parse_program("mov r1, 0xFFFFFFFFFFFFFFFF\ncall f\nf: ret\n");
  EXPECT_EQ(std::get<ImmOperand>(p.instructions[0].operands[1]).value, ~uint64_t{0});
  EXPECT_EQ(p.instructions[1].group, InsnGroup::Call);
  EXPECT_EQ(p.instructions[2].group, InsnGroup::Ret);
  EXPECT_EQ(group_of(Mnemonic::Jz), InsnGroup::Jump);
  EXPECT_EQ(group_of(Mnemonic::Add), InsnGroup::None);
}

TEST(Asm, DisassembleSingleHalt) {
  Program p;
  p.instructions.push_back(Instruction{Mnemonic::Halt, {}, 0, InsnGroup::None});
  std::string text = disassemble(p);
  EXPECT_EQ(text.substr(text.find_first_not_of(" \t")), "halt\n");
}

TEST(Asm, RoundTripCtSwap) {
  const auto& entry = support::corpus_entry("ct_swap");
  Program again = parse_program(disassemble(entry.program));
  EXPECT_EQ(again.instructions, entry.program.instructions);
  EXPECT_EQ(again.entry, entry.program.entry);
}

TEST(Asm, RoundTripCorpus) {
  for (const auto& e : support::corpus()) {
    Program again = parse_program(disassemble(e.program));
    EXPECT_EQ(again.instructions, e.program.instructions) << e.name;
  }
}

TEST(Asm, RoundTripRandomPrograms) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    support::RandomProgramOptions o;
    o.calls = i % 2 == 0;
    o.forward_branches = i % 3 != 0;
    Program p = parse_program(support::random_program(rng, o));
    Program q = parse_program(disassemble(p));
    ASSERT_EQ(q.instructions, p.instructions);
  }
}

// Never crashes: every mangled source either parses or yields a located error.
TEST(Asm, ParserTotality) {
  std::mt19937_64 rng(5);
  const std::string base = support::random_program(rng);
  const std::string alphabet = "r0123456789[]+*,-: abcdefghijklmnopqrstuvwxyz;\n.x";
  for (int i = 0; i < 2000; ++i) {
    std::string s = base;
    for (int k = 0; k < 3; ++k) s[rng() % s.size()] = alphabet[rng() % alphabet.size()];
    try {
      parse_program(s);
    } catch (const ParseError& e) {
      EXPECT_GE(e.line(), 1u);
      EXPECT_FALSE(e.message().empty());
    }
  }
}
