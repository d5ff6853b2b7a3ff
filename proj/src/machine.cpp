#include "leakcheck/machine.hpp"

#include <algorithm>
#include <sstream>

namespace leakcheck {

namespace {

std::string hex(uint64_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

uint64_t size_mask(unsigned size) { return size >= 8 ? ~uint64_t{0} : (uint64_t{1} << (8 * size)) - 1; }

uint64_t alu(Mnemonic op, uint64_t a, uint64_t b) {
  switch (op) {
    case Mnemonic::Add:
      return a + b;
    case Mnemonic::Sub:
      return a - b;
    case Mnemonic::Mul:
      return a * b;
    case Mnemonic::Udiv:
      return a / b;
    case Mnemonic::And:
      return a & b;
    case Mnemonic::Or:
      return a | b;
    case Mnemonic::Xor:
      return a ^ b;
    case Mnemonic::Shl:
      return a << (b & 63);
    case Mnemonic::Shr:
      return a >> (b & 63);
    case Mnemonic::Sar:
      return static_cast<uint64_t>(static_cast<int64_t>(a) >> (b & 63));
    case Mnemonic::Sltu:
      return a < b ? 1 : 0;
    default:
      return 0;
  }
}

}  // namespace

UnmappedAccess::UnmappedAccess(uint64_t addr)
    : std::runtime_error("unmapped memory access at " + hex(addr)), address_(addr) {}

uint8_t Memory::read_byte(uint64_t addr) const {
  auto it = pages_.find(addr >> kPageBits);
  if (it == pages_.end()) return 0;
  return it->second[addr & (kPageSize - 1)];
}

void Memory::write_byte(uint64_t addr, uint8_t value) {
  Page& page = pages_[addr >> kPageBits];
  uint8_t& slot = page[addr & (kPageSize - 1)];
  if (journal_depth_ > 0) journal_.push_back({addr, slot});
  slot = value;
}

uint64_t Memory::read(uint64_t addr, unsigned size) const {
  uint64_t v = 0;
  for (unsigned i = 0; i < size; ++i) v |= uint64_t{read_byte(addr + i)} << (8 * i);
  return v;
}

void Memory::write(uint64_t addr, unsigned size, uint64_t value) {
  for (unsigned i = 0; i < size; ++i) write_byte(addr + i, static_cast<uint8_t>(value >> (8 * i)));
}

void Memory::read_bytes(uint64_t addr, std::span<uint8_t> out) const {
  for (size_t i = 0; i < out.size(); ++i) out[i] = read_byte(addr + i);
}

void Memory::write_bytes(uint64_t addr, std::span<const uint8_t> bytes) {
  for (size_t i = 0; i < bytes.size(); ++i) write_byte(addr + i, bytes[i]);
}

void Memory::check_access(uint64_t addr, uint64_t length) const {
  if (strict_ && !mapped_.contains(addr, length)) throw UnmappedAccess(addr);
}

void Memory::rollback(size_t mark) {
  while (journal_.size() > mark) {
    const UndoEntry& e = journal_.back();
    pages_[e.addr >> kPageBits][e.addr & (kPageSize - 1)] = e.old;
    journal_.pop_back();
  }
}

void Memory::close_journal() {
  if (journal_depth_ > 0 && --journal_depth_ == 0) journal_.clear();
}

bool Memory::contents_subset_of(const Memory& other) const {
  static const Page kZero{};
  for (const auto& [index, page] : pages_) {
    auto it = other.pages_.find(index);
    const Page& rhs = it == other.pages_.end() ? kZero : it->second;
    if (page != rhs) return false;
  }
  return true;
}

bool Memory::operator==(const Memory& other) const {
  return contents_subset_of(other) && other.contents_subset_of(*this);
}

std::string_view error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::DivByZero:
      return "div_by_zero";
    case ErrorKind::PcOutOfProgram:
      return "pc_out_of_program";
    case ErrorKind::BudgetExceeded:
      return "budget_exceeded";
    case ErrorKind::UnmappedMemory:
      return "unmapped_memory";
    case ErrorKind::Timeout:
      return "timeout";
    case ErrorKind::ClauseFault:
      return "clause_fault";
  }
  return "error";
}

std::string ExecError::describe() const {
  std::string s = std::string(error_kind_name(kind)) + " at pc " + hex(pc);
  if (!detail.empty()) s += ": " + detail;
  return s;
}

std::optional<ExecError> plan_step(const MachineState& state, const Program& program, StepPlan& plan) {
  plan.events.clear();
  plan.halts = false;
  const uint64_t pc = state.pc;
  const Instruction* insn = program.fetch(pc);
  plan.insn = insn;
  if (!insn) return ExecError{ErrorKind::PcOutOfProgram, pc, "no instruction at " + hex(pc)};

  const UopContext ctx{pc, insn->mnemonic, insn->group, static_cast<uint8_t>(kInstructionSize), 0};
  auto emit = [&](UopData d) { plan.events.push_back(MicroOp{d, ctx}); };
  auto read_reg = [&](uint8_t r) {
    emit(ReadUop{r});
    return state.regs[r];
  };
  auto value_of = [&](const Operand& op) -> uint64_t {
    if (const auto* r = std::get_if<RegOperand>(&op)) return read_reg(r->reg);
    if (const auto* i = std::get_if<ImmOperand>(&op)) return i->value;
    return std::get<LabelOperand>(op).address;
  };
  auto dest = [&](size_t i) { return std::get<RegOperand>(insn->operands[i]).reg; };
  auto target = [&](size_t i) { return std::get<LabelOperand>(insn->operands[i]).address; };
  // Reads the address registers and emits the addr event.
  auto address = [&](const MemOperand& m) {
    uint64_t base = read_reg(m.base);
    std::optional<uint64_t> index;
    if (m.index) index = read_reg(*m.index);
    uint64_t ea = base + index.value_or(0) * m.scale + static_cast<uint64_t>(static_cast<int64_t>(m.offset));
    return std::pair{AddrUop{base, index, m.scale, m.offset, ea}, ea};
  };
  auto mapped = [&](uint64_t addr, unsigned size) -> std::optional<ExecError> {
    try {
      state.mem.check_access(addr, size);
    } catch (const UnmappedAccess& e) {
      return ExecError{ErrorKind::UnmappedMemory, pc, e.what()};
    }
    return std::nullopt;
  };

  plan.next_pc = pc + kInstructionSize;
  const Mnemonic m = insn->mnemonic;
  switch (m) {
    case Mnemonic::Mov:
      emit(WriteUop{dest(0), value_of(insn->operands[1])});
      break;
    case Mnemonic::Load: {
      auto [addr_uop, ea] = address(std::get<MemOperand>(insn->operands[1]));
      if (auto err = mapped(ea, insn->access_size)) return err;
      emit(addr_uop);
      emit(LoadUop{ea, insn->access_size});
      emit(WriteUop{dest(0), state.mem.read(ea, insn->access_size)});
      break;
    }
    case Mnemonic::Store: {
      auto [addr_uop, ea] = address(std::get<MemOperand>(insn->operands[0]));
      uint64_t v = value_of(insn->operands[1]) & size_mask(insn->access_size);
      if (auto err = mapped(ea, insn->access_size)) return err;
      emit(addr_uop);
      emit(StoreUop{ea, insn->access_size, v});
      break;
    }
    case Mnemonic::Jmp:
      plan.next_pc = target(0);
      emit(JumpUop{plan.next_pc, true});
      break;
    case Mnemonic::Jz:
    case Mnemonic::Jnz: {
      uint64_t c = read_reg(dest(0));
      bool taken = (m == Mnemonic::Jz) ? c == 0 : c != 0;
      if (taken) plan.next_pc = target(1);
      emit(JumpUop{target(1), taken});
      break;
    }
    case Mnemonic::Call: {
      uint64_t sp = state.regs[kStackPointer] - 8;
      if (auto err = mapped(sp, 8)) return err;
      emit(StoreUop{sp, 8, pc + kInstructionSize});
      emit(WriteUop{static_cast<uint8_t>(kStackPointer), sp});
      plan.next_pc = target(0);
      emit(JumpUop{plan.next_pc, true});
      break;
    }
    case Mnemonic::Ret: {
      uint64_t sp = read_reg(kStackPointer);
      if (auto err = mapped(sp, 8)) return err;
      emit(LoadUop{sp, 8});
      emit(WriteUop{static_cast<uint8_t>(kStackPointer), sp + 8});
      plan.next_pc = state.mem.read(sp, 8);
      emit(JumpUop{plan.next_pc, true});
      break;
    }
    case Mnemonic::Fence:
      break;
    case Mnemonic::Halt:
      plan.halts = true;
      plan.next_pc = pc;
      break;
    default: {
      uint64_t a = value_of(insn->operands[1]);
      uint64_t b = value_of(insn->operands[2]);
      if (m == Mnemonic::Udiv && b == 0) return ExecError{ErrorKind::DivByZero, pc, "udiv by zero"};
      emit(ExprUop{m, {a, b}});
      emit(WriteUop{dest(0), alu(m, a, b)});
      break;
    }
  }
  return std::nullopt;
}

void apply_effects(MachineState& state, const StepPlan& plan, size_t event_count) {
  event_count = std::min(event_count, plan.events.size());
  for (size_t i = 0; i < event_count; ++i) {
    const MicroOp& e = plan.events[i];
    if (const auto* st = e.as<StoreUop>()) {
      state.mem.write(st->address, st->size, st->value);
    } else if (const auto* w = e.as<WriteUop>()) {
      state.regs[w->reg] = w->value;
    }
  }
}

void commit(MachineState& state, const StepPlan& plan) {
  apply_effects(state, plan, plan.events.size());
  if (plan.halts) {
    state.halted = true;
  } else {
    state.pc = plan.next_pc;
  }
  ++state.tick;
}

StepResult step(MachineState& state, const Program& program, std::span<EventSink* const> sinks) {
  if (state.halted) return {StepOutcome::Halted, std::nullopt};
  StepPlan plan;
  if (auto err = plan_step(state, program, plan)) return {StepOutcome::Error, std::move(err)};
  for (const MicroOp& e : plan.events) {
    for (EventSink* sink : sinks) sink->on_uop(e, state);
  }
  commit(state, plan);
  return {plan.halts ? StepOutcome::Halted : StepOutcome::Continued, std::nullopt};
}

RunResult run(MachineState& state, const Program& program, std::span<EventSink* const> sinks, uint64_t max_steps) {
  RunResult result{Termination::Halted, 0, std::nullopt};
  if (state.halted) return result;
  while (result.steps < max_steps) {
    StepResult r = step(state, program, sinks);
    ++result.steps;
    if (r.outcome == StepOutcome::Halted) return result;
    if (r.outcome == StepOutcome::Error) {
      --result.steps;
      result.reason = Termination::Error;
      result.error = std::move(r.error);
      return result;
    }
  }
  result.reason = Termination::BudgetExceeded;
  result.error = ExecError{ErrorKind::BudgetExceeded, state.pc, "step budget of " + std::to_string(max_steps) + " exhausted"};
  return result;
}

}  // namespace leakcheck
