#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "leakcheck/machine.hpp"

namespace leakcheck {

struct Observation {
  std::string tag;
  std::vector<uint64_t> payload;
  uint64_t tick = 0;
  unsigned depth = 0;

  Observation() = default;
  Observation(std::string t, std::vector<uint64_t> p) : tag(std::move(t)), payload(std::move(p)) {}

  // Tick is bookkeeping only and does not take part in comparison.
  bool operator==(const Observation& o) const {
    return tag == o.tag && payload == o.payload && depth == o.depth;
  }
};

using LeakageTrace = std::vector<Observation>;

struct MemRegion {
  uint64_t address = 0;
  uint64_t length = 0;

  bool operator==(const MemRegion&) const = default;
};

// What a clause learns before the first instruction executes.
struct StartInfo {
  std::vector<MemRegion> initialized;
  uint64_t stack_low = 0;
  uint64_t stack_high = 0;
};

/// A leakage clause maps micro-ops to at most one observation each.
///
/// Handlers may read the machine state but never modify it; they may keep
/// private state, which is why clause instances are confined to one run.
class LeakageClause {
 public:
  virtual ~LeakageClause() = default;
  virtual std::string_view name() const = 0;
  virtual void on_start(const StartInfo&) {}
  virtual std::optional<Observation> observe(const MicroOp& uop, const MachineState& state) = 0;
  virtual std::unique_ptr<LeakageClause> clone() const = 0;
  // Overwrites this clause's state with that of `other`, a clone of it.
  virtual void restore(const LeakageClause& other) = 0;
};

template <typename Derived>
class ClauseBase : public LeakageClause {
 public:
  std::unique_ptr<LeakageClause> clone() const override {
    return std::make_unique<Derived>(static_cast<const Derived&>(*this));
  }
  void restore(const LeakageClause& other) override {
    static_cast<Derived&>(*this) = dynamic_cast<const Derived&>(other);
  }
};

/// Event sink that runs a clause and stamps what it emits.
class TraceCollector : public EventSink {
 public:
  TraceCollector(LeakageClause* clause, LeakageTrace& trace) : clause_(clause), trace_(trace) {}
  void on_uop(const MicroOp& uop, const MachineState& state) override;

 private:
  LeakageClause* clause_;
  LeakageTrace& trace_;
};

struct Divergence {
  size_t index = 0;
  std::optional<Observation> left;  // nullopt = end of trace
  std::optional<Observation> right;
};

bool trace_equal(const LeakageTrace& a, const LeakageTrace& b);
std::optional<Divergence> first_divergence(const LeakageTrace& a, const LeakageTrace& b);

/// Dump format: one observation per line, `tick depth tag v1 v2 ...`, with
/// tick and depth in decimal and payload values as lowercase 0x-hex.
std::string format_observation(const Observation& obs);
std::string dump_trace(const LeakageTrace& trace);

class TraceFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Observation parse_observation(std::string_view line);
LeakageTrace parse_trace(std::string_view text);

}  // namespace leakcheck
