#include <gtest/gtest.h>

#include <random>

#include "support/helpers.hpp"

using namespace leakcheck;
using support::show;
using support::step_events;
using Strings = std::vector<std::string>;

namespace {

MachineState at_entry(const Program& p) {
  MachineState s;
  s.pc = p.entry;
  s.regs[kStackPointer] = 0x7fff0000;
  return s;
}

}  // namespace

TEST(Machine, AddEvents) {
  Program p = parse_program("add r1, r2, r3\nhalt");
  MachineState s = at_entry(p);
  s.regs[2] = 3;
  s.regs[3] = 4;
  EXPECT_EQ(show(step_events(s, p)), (Strings{"read(r2)", "read(r3)", "expr(add,0x3,0x4)", "write(r1,0x7)"}));
  EXPECT_EQ(s.regs[1], 7u);
  EXPECT_EQ(s.tick, 1u);
  EXPECT_EQ(s.pc, 0x1004u);
}

TEST(Machine, StoreEvents) {
  Program p = parse_program("store [r2 + 0], r5, 8\nhalt");
  MachineState s = at_entry(p);
  s.regs[2] = 0x2000;
  s.regs[5] = 9;
  EXPECT_EQ(show(step_events(s, p)),
            (Strings{"read(r2)", "read(r5)", "addr(0x2000,-,1,0,0x2000)", "store(0x2000,8,0x9)"}));
  EXPECT_EQ(s.mem.read(0x2000, 8), 9u);
}

TEST(Machine, StoreEventSeesPreStoreMemory) {
  struct Probe : EventSink {
    uint64_t seen = 1;
    void on_uop(const MicroOp& u, const MachineState& st) override {
      if (u.as<StoreUop>()) seen = st.mem.read(0x2000, 8);
    }
  } probe;
  Program p = parse_program("store [r2], r5, 8\nhalt");
  MachineState s = at_entry(p);
  s.regs[2] = 0x2000;
  s.regs[5] = 9;
  EXPECT_EQ(s.mem.read(0x2000, 8), 0u);
  EventSink* sinks[] = {&probe};
  step(s, p, sinks);
  EXPECT_EQ(probe.seen, 0u);
}

TEST(Machine, ConditionalJumpNotTaken) {
  Program p = parse_program("jnz r1, L\nhalt\nhalt\nhalt\nL: halt");
  MachineState s = at_entry(p);
  EXPECT_EQ(show(step_events(s, p)), (Strings{"read(r1)", "jump(0x1010,0)"}));
  EXPECT_EQ(s.pc, 0x1004u);
}

TEST(Machine, ConditionalJumpTaken) {
  Program p = parse_program("jz r1, L\nhalt\nL: halt");
  MachineState s = at_entry(p);
  EXPECT_EQ(show(step_events(s, p)), (Strings{"read(r1)", "jump(0x1008,1)"}));
  EXPECT_EQ(s.pc, 0x1008u);
}

TEST(Machine, LoadEvents) {
  Program p = parse_program("load r1, [r2 + r3*4 - 8], 2\nhalt");
  MachineState s = at_entry(p);
  s.regs[2] = 0x2000;
  s.regs[3] = 3;
  s.mem.write(0x2004, 2, 0xbeef);
  EXPECT_EQ(show(step_events(s, p)),
            (Strings{"read(r2)", "read(r3)", "addr(0x2000,0x3,4,-8,0x2004)", "load(0x2004,2)", "write(r1,0xbeef)"}));
}

TEST(Machine, CallAndRet) {
  Program p = parse_program("call f\nhalt\nf: ret");
  MachineState s = at_entry(p);
  const uint64_t sp = s.regs[kStackPointer];
  EXPECT_EQ(show(step_events(s, p)), (Strings{"store(0x7ffefff8,8,0x1004)", "write(r15,0x7ffefff8)", "jump(0x1008,1)"}));
  EXPECT_EQ(show(step_events(s, p)),
            (Strings{"read(r15)", "load(0x7ffefff8,8)", "write(r15,0x7fff0000)", "jump(0x1004,1)"}));
  EXPECT_EQ(s.pc, 0x1004u);
  EXPECT_EQ(s.regs[kStackPointer], sp);
}

TEST(Machine, EventContext) {
  Program p = parse_program("mov r1, 1\nload r2, [r1], 8\nhalt");
  MachineState s = at_entry(p);
  step_events(s, p);
  auto events = step_events(s, p);
  for (const auto& e : events) {
    EXPECT_EQ(e.ctx.pc, 0x1004u);
    EXPECT_EQ(e.ctx.mnemonic, Mnemonic::Load);
    EXPECT_EQ(e.ctx.size, 4);
    EXPECT_EQ(e.ctx.depth, 0u);
  }
}

TEST(Machine, ImmediatesAppearInExpr) {
  Program p = parse_program("xor r1, r2, 0xff\nhalt");
  MachineState s = at_entry(p);
  s.regs[2] = 0xf0;
  EXPECT_EQ(show(step_events(s, p)), (Strings{"read(r2)", "expr(xor,0xf0,0xff)", "write(r1,0xf)"}));
}

TEST(Machine, AluSemantics) {
  auto eval = [](const char* op, uint64_t a, uint64_t b) {
    Program p = parse_program(std::string(op) + " r1, r2, r3\nhalt");
    MachineState s = at_entry(p);
    s.regs[2] = a;
    s.regs[3] = b;
    step_events(s, p);
    return s.regs[1];
  };
  const uint64_t max = ~uint64_t{0};
  EXPECT_EQ(eval("add", max, 2), 1u);
  EXPECT_EQ(eval("sub", 0, 1), max);
  EXPECT_EQ(eval("mul", uint64_t{1} << 63, 2), 0u);
  EXPECT_EQ(eval("udiv", 17, 5), 3u);
  EXPECT_EQ(eval("shl", 1, 65), 2u);
  EXPECT_EQ(eval("shr", 0x80, 64 + 4), 8u);
  EXPECT_EQ(eval("sar", uint64_t{1} << 63, 63), max);
  EXPECT_EQ(eval("sltu", 1, 2), 1u);
  EXPECT_EQ(eval("sltu", max, 2), 0u);
  EXPECT_EQ(eval("and", 0xf0f0, 0xff00), 0xf000u);
  EXPECT_EQ(eval("or", 0xf0, 0x0f), 0xffu);
}

TEST(Machine, RunHalts) {
  Program p = parse_program("mov r0, 1\nhalt");
  MachineState s = at_entry(p);
  RunResult r = run(s, p, {}, 100);
  EXPECT_EQ(r.reason, Termination::Halted);
  EXPECT_EQ(r.steps, 2u);
  EXPECT_TRUE(s.halted);
  EXPECT_EQ(s.tick, 2u);
}

TEST(Machine, RunBudget) {
  Program p = parse_program("L: jmp L");
  MachineState s = at_entry(p);
  RunResult r = run(s, p, {}, 10);
  EXPECT_EQ(r.reason, Termination::BudgetExceeded);
  EXPECT_EQ(r.steps, 10u);
  EXPECT_EQ(s.tick, 10u);
}

TEST(Machine, DivisionByZero) {
  Program p = parse_program("mov r1, 1\nudiv r2, r1, r3\nhalt");
  MachineState s = at_entry(p);
  RunResult r = run(s, p, {}, 10);
  EXPECT_EQ(r.reason, Termination::Error);
  ASSERT_TRUE(r.error);
  EXPECT_EQ(r.error->kind, ErrorKind::DivByZero);
  EXPECT_EQ(r.error->pc, 0x1004u);
}

TEST(Machine, PcOutOfProgram) {
  Program p = parse_program("mov r1, 0\nret");
  MachineState s = at_entry(p);
  RunResult r = run(s, p, {}, 10);
  EXPECT_EQ(r.reason, Termination::Error);
  EXPECT_EQ(r.error->kind, ErrorKind::PcOutOfProgram);
  EXPECT_EQ(r.error->pc, 0u);
}

TEST(Machine, StrictModeUnmapped) {
  Program p = parse_program("load r1, [r2], 8\nhalt");
  MachineState s = at_entry(p);
  s.regs[2] = 0x3000;
  s.mem.set_strict(true);
  s.mem.map(0x2000, 0x1000);
  RunResult r = run(s, p, {}, 10);
  EXPECT_EQ(r.error->kind, ErrorKind::UnmappedMemory);
  s = at_entry(p);
  s.regs[2] = 0x2ff8;
  s.mem.set_strict(true);
  s.mem.map(0x2000, 0x1000);
  EXPECT_EQ(run(s, p, {}, 10).reason, Termination::Halted);
}

TEST(Memory, LittleEndian) {
  Memory m;
  m.write(0x2000, 4, 0xAABBCCDD);
  EXPECT_EQ(m.read(0x2000, 1), 0xDDu);
  EXPECT_EQ(m.read(0x2001, 2), 0xBBCCu);
  EXPECT_EQ(m.read(0x2000, 8), 0xAABBCCDDu);
}

TEST(Memory, DefaultZero) {
  Memory m;
  EXPECT_EQ(m.read(0x123456789, 8), 0u);
}

TEST(Memory, WriteReadProperty) {
  std::mt19937_64 rng(1);
  Memory m;
  for (int i = 0; i < 1000; ++i) {
    uint64_t v = rng();
    m.write(0x2000, 8, v);
    ASSERT_EQ(m.read(0x2000, 8), v);
  }
}

TEST(Memory, PageStraddle) {
  Memory m;
  m.write(0x2ffc, 8, 0x1122334455667788);
  EXPECT_EQ(m.read(0x2ffc, 8), 0x1122334455667788u);
  EXPECT_EQ(m.read(0x3000, 4), 0x11223344u);
}

TEST(Memory, WriteTruncatesToSize) {
  Memory m;
  m.write(0x2000, 2, 0x12345678);
  EXPECT_EQ(m.read(0x2000, 8), 0x5678u);
}

TEST(Memory, JournalRollback) {
  Memory m;
  m.write(0x2000, 8, 1);
  Memory before = m;
  m.open_journal();
  size_t mark = m.journal_mark();
  m.write(0x2000, 8, 2);
  m.write(0x9000, 4, 3);
  m.rollback(mark);
  m.close_journal();
  EXPECT_EQ(m, before);
  EXPECT_EQ(m.read(0x9000, 4), 0u);
}

TEST(Memory, EqualityIgnoresUntouchedZeros) {
  Memory a, b;
  b.write(0x5000, 8, 0);
  EXPECT_EQ(a, b);
  b.write(0x5000, 1, 1);
  EXPECT_FALSE(a == b);
}

TEST(Machine, Determinism) {
  Program p = parse_program(
      "mov r2, 0x2000\nmov r1, 5\nL: store [r2 + r1*8], r1, 8\nsub r1, r1, 1\njnz r1, L\ncall f\nhalt\n"
      "f: load r3, [r2 + 8], 8\nret");
  std::vector<std::string> first;
  MachineState end1;
  for (int k = 0; k < 2; ++k) {
    MachineState s = at_entry(p);
    support::Recorder rec;
    EventSink* sinks[] = {&rec};
    run(s, p, sinks, 1000);
    if (k == 0) {
      first = show(rec.uops);
      end1 = s;
    } else {
      EXPECT_EQ(show(rec.uops), first);
      EXPECT_EQ(s, end1);
    }
  }
}
