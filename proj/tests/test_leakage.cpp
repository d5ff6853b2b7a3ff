#include <gtest/gtest.h>

#include "leakcheck/models.hpp"
#include "support/helpers.hpp"

using namespace leakcheck;
using support::obs;

namespace {

MachineState start(const Program& p) {
  MachineState s;
  s.pc = p.entry;
  s.regs[kStackPointer] = 0x7fff0000;
  return s;
}

LeakageTrace trace_of(const char* src, std::string_view model, MachineState* init = nullptr) {
  Program p = parse_program(src);
  MachineState s = init ? *init : start(p);
  s.pc = p.entry;
  auto clause = make_leakage_clause(model);
  return support::arch_trace(p, s, *clause);
}

}  // namespace

TEST(Leakage, CtIgnoresRegisterOnlyCode) { EXPECT_TRUE(trace_of("mov r0, 1\nhalt", "ct").empty()); }

TEST(Leakage, CtJump) {
  LeakageTrace t = trace_of("jmp L\nL: halt", "ct");
  EXPECT_EQ(t, (LeakageTrace{obs("jump", {0x1004})}));
}

TEST(Leakage, SsStoreOfZeroToZeroMemory) {
  LeakageTrace t = trace_of("mov r1, 0x2000\nstore [r1], 0, 8\nhalt", "ss");
  EXPECT_EQ(t, (LeakageTrace{obs("ss", {0x2000, 0})}));
}

TEST(Leakage, StampsTickAndDepth) {
  LeakageTrace t = trace_of("mov r1, 0x2000\nload r2, [r1], 8\nmov r3, 1\nstore [r1], r3, 8\nhalt", "ct");
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0].tick, 1u);
  EXPECT_EQ(t[1].tick, 3u);
  EXPECT_EQ(t[0].depth, 0u);
}

TEST(Leakage, NullClauseYieldsEmptyTrace) {
  Program p = parse_program("mov r1, 0x2000\nload r2, [r1], 8\njmp L\nL: halt");
  MachineState s = start(p);
  LeakageTrace trace;
  explore(s, p, nullptr, trace, nullptr, {});
  EXPECT_TRUE(trace.empty());
}

TEST(Leakage, TraceEquality) {
  LeakageTrace a{obs("load", {0x2000})};
  EXPECT_TRUE(trace_equal(a, a));
  EXPECT_FALSE(first_divergence(a, a));
}

TEST(Leakage, DivergenceAtFirstDifference) {
  auto d = first_divergence({obs("jump", {8})}, {obs("jump", {12})});
  ASSERT_TRUE(d);
  EXPECT_EQ(d->index, 0u);
  EXPECT_EQ(d->left->payload[0], 8u);
  EXPECT_EQ(d->right->payload[0], 12u);
}

TEST(Leakage, DivergenceAtEndOfShorterTrace) {
  auto d = first_divergence({obs("load", {1})}, {obs("load", {1}), obs("ss", {1, 0})});
  ASSERT_TRUE(d);
  EXPECT_EQ(d->index, 1u);
  EXPECT_FALSE(d->left);
  EXPECT_EQ(*d->right, obs("ss", {1, 0}));
  EXPECT_FALSE(trace_equal({obs("load", {1})}, {obs("load", {1}), obs("ss", {1, 0})}));
}

TEST(Leakage, EqualityIgnoresTickButNotDepth) {
  Observation a = obs("load", {1});
  Observation b = a;
  b.tick = 99;
  EXPECT_EQ(a, b);
  b.depth = 1;
  EXPECT_FALSE(a == b);
  Observation c = obs("store", {1});
  EXPECT_FALSE(a == c);
}

TEST(Leakage, DumpFormat) {
  Observation o = obs("ss", {0x2000, 0});
  o.tick = 12;
  o.depth = 1;
  EXPECT_EQ(format_observation(o), "12 1 ss 0x2000 0x0");
  EXPECT_EQ(dump_trace({o, obs("jump", {0xff})}), "12 1 ss 0x2000 0x0\n0 0 jump 0xff\n");
}

TEST(Leakage, DumpParseRoundTrip) {
  LeakageTrace t = trace_of(
      "mov r1, 0x2000\nL: load r2, [r1], 8\nstore [r1], r2, 8\nadd r1, r1, 8\nsltu r3, r1, 0x2040\njnz r3, L\nhalt",
      "ct");
  LeakageTrace back = parse_trace(dump_trace(t));
  ASSERT_EQ(back, t);
  for (size_t i = 0; i < t.size(); ++i) EXPECT_EQ(back[i].tick, t[i].tick);
  Observation empty_payload = obs("pf", {});
  EXPECT_EQ(parse_observation(format_observation(empty_payload)), empty_payload);
}

TEST(Leakage, ParseRejectsGarbage) {
  EXPECT_THROW(parse_trace("x 0 load 0x1\n"), TraceFormatError);
  EXPECT_THROW(parse_trace("1 0\n"), TraceFormatError);
  EXPECT_THROW(parse_trace("1 0 load zz\n"), TraceFormatError);
}

TEST(Leakage, FreshClausesGiveIdenticalTraces) {
  const char* src = "mov r1, 0x2000\nstore [r1], 0, 8\nadd r2, r1, 0\nmov r3, 5\nmul r4, r3, 1\nhalt";
  for (const auto& m : leakage_models()) {
    EXPECT_EQ(trace_of(src, m.name), trace_of(src, m.name)) << m.name;
  }
}

TEST(Leakage, ClauseCloneAndRestore) {
  Program p = parse_program("mov r1, 1\nadd r2, r1, 1\nhalt");
  auto clause = make_leakage_clause("op");
  MachineState s = start(p);
  auto first = support::arch_trace(p, s, *clause);
  auto snapshot = clause->clone();
  auto more = support::arch_trace(p, s, *clause);
  EXPECT_TRUE(first.empty());
  ASSERT_EQ(more.size(), 1u);
  clause->restore(*snapshot);
  EXPECT_EQ(support::arch_trace(p, s, *clause), more);
}
