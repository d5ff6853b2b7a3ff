#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "leakcheck/asm.hpp"
#include "leakcheck/range_set.hpp"

namespace leakcheck {

class UnmappedAccess : public std::runtime_error {
 public:
  explicit UnmappedAccess(uint64_t addr);
  uint64_t address() const { return address_; }

 private:
  uint64_t address_;
};

/// Sparse byte-addressable memory over the full 64-bit space.
///
/// Bytes that were never written read as zero. In strict mode every access
/// must fall inside a mapped range or UnmappedAccess is thrown. While a
/// journal is open every write records the bytes it overwrites so that
/// rollback() can undo it.
class Memory {
 public:
  static constexpr uint64_t kPageBits = 12;
  static constexpr uint64_t kPageSize = uint64_t{1} << kPageBits;

  uint64_t read(uint64_t addr, unsigned size) const;
  void write(uint64_t addr, unsigned size, uint64_t value);
  uint8_t read_byte(uint64_t addr) const;
  void write_byte(uint64_t addr, uint8_t value);
  void read_bytes(uint64_t addr, std::span<uint8_t> out) const;
  void write_bytes(uint64_t addr, std::span<const uint8_t> bytes);

  void set_strict(bool strict) { strict_ = strict; }
  bool strict() const { return strict_; }
  void map(uint64_t addr, uint64_t length) { mapped_.insert(addr, length); }
  bool is_mapped(uint64_t addr, uint64_t length) const { return mapped_.contains(addr, length); }
  // Throws UnmappedAccess in strict mode when the range is not mapped.
  void check_access(uint64_t addr, uint64_t length) const;

  size_t journal_mark() const { return journal_.size(); }
  void open_journal() { ++journal_depth_; }
  void rollback(size_t mark);
  void close_journal();

  // Content equality; never-written bytes compare equal to written zeros.
  bool operator==(const Memory& other) const;

 private:
  using Page = std::array<uint8_t, kPageSize>;
  struct UndoEntry {
    uint64_t addr;
    uint8_t old;
  };

  bool contents_subset_of(const Memory& other) const;

  std::unordered_map<uint64_t, Page> pages_;
  RangeSet mapped_;
  bool strict_ = false;
  std::vector<UndoEntry> journal_;
  unsigned journal_depth_ = 0;
};

struct MachineState {
  std::array<uint64_t, kNumRegisters> regs{};
  uint64_t pc = 0;
  uint64_t tick = 0;  // retired instructions
  bool halted = false;
  Memory mem;

  bool operator==(const MachineState&) const = default;
};

struct ReadUop {
  uint8_t reg;
};
struct WriteUop {
  uint8_t reg;
  uint64_t value;
};
struct ExprUop {
  Mnemonic op;
  std::array<uint64_t, 2> values;
};
struct AddrUop {
  uint64_t base;
  std::optional<uint64_t> index;
  uint8_t scale;
  int32_t offset;
  uint64_t effective;
};
struct LoadUop {
  uint64_t address;
  uint8_t size;
};
struct StoreUop {
  uint64_t address;
  uint8_t size;
  uint64_t value;
};
struct JumpUop {
  uint64_t target;
  bool taken;
};

using UopData = std::variant<ReadUop, WriteUop, ExprUop, AddrUop, LoadUop, StoreUop, JumpUop>;

struct UopContext {
  uint64_t pc = 0;
  Mnemonic mnemonic = Mnemonic::Halt;
  InsnGroup group = InsnGroup::None;
  uint8_t size = kInstructionSize;
  unsigned depth = 0;  // speculation depth, 0 = architectural
};

struct MicroOp {
  UopData data;
  UopContext ctx;

  template <typename T>
  const T* as() const {
    return std::get_if<T>(&data);
  }
};

enum class ErrorKind { DivByZero, PcOutOfProgram, BudgetExceeded, UnmappedMemory, Timeout, ClauseFault };

std::string_view error_kind_name(ErrorKind k);

struct ExecError {
  ErrorKind kind;
  uint64_t pc = 0;
  std::string detail;

  std::string describe() const;
};

// The micro-ops of one instruction together with its control-flow outcome.
// Architectural effects are exactly the store and write events plus next_pc.
struct StepPlan {
  const Instruction* insn = nullptr;
  std::vector<MicroOp> events;
  uint64_t next_pc = 0;
  bool halts = false;
};

/// Computes the events of the instruction at state.pc without changing state.
std::optional<ExecError> plan_step(const MachineState& state, const Program& program, StepPlan& plan);

/// Applies the effects of plan.events[0, event_count) to state, in order.
void apply_effects(MachineState& state, const StepPlan& plan, size_t event_count);

/// Applies all effects, advances pc (or halts) and retires the instruction.
void commit(MachineState& state, const StepPlan& plan);

class EventSink {
 public:
  virtual ~EventSink() = default;
  virtual void on_uop(const MicroOp& uop, const MachineState& state) = 0;
};

enum class StepOutcome { Continued, Halted, Error };

struct StepResult {
  StepOutcome outcome;
  std::optional<ExecError> error;
};

/// Executes one instruction, delivering its micro-ops to every sink in
/// registration order before committing.
StepResult step(MachineState& state, const Program& program, std::span<EventSink* const> sinks);

enum class Termination { Halted, BudgetExceeded, Error, Timeout };

struct RunResult {
  Termination reason;
  uint64_t steps = 0;
  std::optional<ExecError> error;
};

RunResult run(MachineState& state, const Program& program, std::span<EventSink* const> sinks, uint64_t max_steps);

}  // namespace leakcheck
