#pragma once

#include <cstdio>
#include <string>
#include <type_traits>
#include <vector>

#include "leakcheck/corpus.hpp"
#include "leakcheck/speculation.hpp"
#include "leakcheck/machine.hpp"

namespace leakcheck::support {

struct Recorder : EventSink {
  std::vector<MicroOp> uops;
  void on_uop(const MicroOp& uop, const MachineState&) override { uops.push_back(uop); }
};

// The events of the single instruction at state.pc.
inline std::vector<MicroOp> step_events(MachineState& state, const Program& program) {
  Recorder rec;
  EventSink* sinks[] = {&rec};
  step(state, program, sinks);
  return rec.uops;
}

// Compact rendering used to compare event sequences.
inline std::string show(const MicroOp& u) {
  auto hex = [](uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
    return std::string(buf);
  };
  return std::visit(
      [&](const auto& d) -> std::string {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ReadUop>) {
          return "read(r" + std::to_string(d.reg) + ")";
        } else if constexpr (std::is_same_v<T, WriteUop>) {
          return "write(r" + std::to_string(d.reg) + "," + hex(d.value) + ")";
        } else if constexpr (std::is_same_v<T, ExprUop>) {
          return "expr(" + std::string(mnemonic_name(d.op)) + "," + hex(d.values[0]) + "," + hex(d.values[1]) + ")";
        } else if constexpr (std::is_same_v<T, AddrUop>) {
          return "addr(" + hex(d.base) + "," + (d.index ? hex(*d.index) : "-") + "," + std::to_string(d.scale) + "," +
                 std::to_string(d.offset) + "," + hex(d.effective) + ")";
        } else if constexpr (std::is_same_v<T, LoadUop>) {
          return "load(" + hex(d.address) + "," + std::to_string(d.size) + ")";
        } else if constexpr (std::is_same_v<T, StoreUop>) {
          return "store(" + hex(d.address) + "," + std::to_string(d.size) + "," + hex(d.value) + ")";
        } else {
          return "jump(" + hex(d.target) + "," + (d.taken ? "1" : "0") + ")";
        }
      },
      u.data);
}

inline std::vector<std::string> show(const std::vector<MicroOp>& uops) {
  std::vector<std::string> out;
  for (const auto& u : uops) out.push_back(show(u));
  return out;
}

inline MicroOp uop(UopData data, Mnemonic m = Mnemonic::Add, uint64_t pc = 0x1000) {
  MicroOp u{std::move(data), {}};
  u.ctx.pc = pc;
  u.ctx.mnemonic = m;
  u.ctx.group = group_of(m);
  return u;
}

inline Observation obs(std::string tag, std::vector<uint64_t> payload) { return {std::move(tag), std::move(payload)}; }

// Architectural trace of `clause` over `program` from `state`, with the
// given memory regions reported as initialized.
inline LeakageTrace arch_trace(const Program& program, MachineState state, LeakageClause& clause,
                               std::vector<MemRegion> initialized = {}) {
  StartInfo info;
  info.initialized = std::move(initialized);
  clause.on_start(info);
  LeakageTrace trace;
  TraceCollector collector(&clause, trace);
  EventSink* sinks[] = {&collector};
  run(state, program, sinks, 100000);
  return trace;
}

inline const CorpusEntry& corpus_entry(const std::string& name) {
  static const std::vector<CorpusEntry> entries = load_corpus();
  for (const auto& e : entries) {
    if (e.name == name) return e;
  }
  throw std::runtime_error("no corpus entry " + name);
}

inline const std::vector<CorpusEntry>& corpus() {
  static const std::vector<CorpusEntry> entries = load_corpus();
  return entries;
}

}  // namespace leakcheck::support
