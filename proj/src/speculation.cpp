#include "leakcheck/speculation.hpp"

#include <array>
#include <stdexcept>
#include <string>

namespace leakcheck {

void SpecConfig::validate() const {
  if (window == 0) throw std::invalid_argument("window must be at least 1");
}

namespace {

constexpr std::array<std::string_view, 3> kEngineParams = {"window", "max_nesting", "rollback"};

struct DeadlineExpired {};

struct ClauseFailure {
  uint64_t pc;
  std::string what;
};

class Engine {
 public:
  Engine(const Program& program, LeakageClause* clause, LeakageTrace& trace, PredictionClause* predictor,
         const SpecConfig& config, const ExploreOptions& options, ExploreStats& stats)
      : program_(program),
        clause_(clause),
        trace_(trace),
        predictor_(predictor),
        config_(config),
        options_(options),
        stats_(stats) {}

  // Executes the instruction at state.pc at the given depth, exploring every
  // misprediction raised by its events, then commits it.
  std::optional<ExecError> execute(MachineState& state, unsigned depth) {
    tick_clock();
    StepPlan plan;
    if (auto err = plan_step(state, program_, plan)) return err;
    for (size_t k = 0; k < plan.events.size(); ++k) {
      MicroOp& uop = plan.events[k];
      uop.ctx.depth = depth;
      observe(uop, state);
      if (!predictor_ || depth >= config_.max_nesting) continue;
      for (const Prediction& p : predictor_->predict(uop, state)) {
        if (!is_correct(p, plan, state)) speculate(state, plan, k, p, depth);
      }
    }
    commit(state, plan);
    return std::nullopt;
  }

 private:
  void observe(const MicroOp& uop, const MachineState& state) {
    if (!clause_) return;
    std::optional<Observation> obs;
    try {
      obs = clause_->observe(uop, state);
    } catch (const std::exception& e) {
      throw ClauseFailure{uop.ctx.pc, e.what()};
    }
    if (!obs) return;
    obs->tick = state.tick;
    obs->depth = uop.ctx.depth;
    trace_.push_back(std::move(*obs));
  }

  static bool is_correct(const Prediction& p, const StepPlan& plan, const MachineState& state) {
    switch (p.kind) {
      case Prediction::Kind::PC:
        return !plan.halts && p.address == plan.next_pc;
      case Prediction::Kind::MEM:
        return state.mem.read(p.address, p.size) == p.value;
      case Prediction::Kind::REG:
        return p.reg < kNumRegisters && state.regs[p.reg] == p.value;
    }
    return true;
  }

  void speculate(MachineState& state, const StepPlan& plan, size_t event_index, const Prediction& p, unsigned depth) {
    ++stats_.speculative_paths;
    const auto regs = state.regs;
    const uint64_t pc = state.pc;
    const uint64_t tick = state.tick;
    const bool halted = state.halted;
    state.mem.open_journal();
    const size_t mark = state.mem.journal_mark();
    std::unique_ptr<LeakageClause> saved;
    if (config_.rollback_leakage_state && clause_) saved = clause_->clone();

    bool resume = true;
    switch (p.kind) {
      case Prediction::Kind::PC:
        // The instruction retires with the effects produced up to the
        // predicted event and continues at the predicted target.
        apply_effects(state, plan, event_index);
        state.pc = p.address;
        ++state.tick;
        break;
      case Prediction::Kind::MEM:
        state.mem.write(p.address, p.size, p.value);
        break;
      case Prediction::Kind::REG:
        if (p.reg < kNumRegisters) {
          state.regs[p.reg] = p.value;
        } else {
          resume = false;
        }
        break;
    }

    for (uint64_t n = 0; resume && n < config_.window; ++n) {
      const Instruction* insn = program_.fetch(state.pc);
      if (!insn || insn->mnemonic == Mnemonic::Fence || insn->mnemonic == Mnemonic::Halt) break;
      ++stats_.speculative_steps;
      if (execute(state, depth + 1)) break;
    }

    state.mem.rollback(mark);
    state.mem.close_journal();
    state.regs = regs;
    state.pc = pc;
    state.tick = tick;
    state.halted = halted;
    if (saved) clause_->restore(*saved);
  }

  void tick_clock() {
    if (!options_.deadline || (++clock_ & 0x3FF) != 0) return;
    if (std::chrono::steady_clock::now() >= *options_.deadline) throw DeadlineExpired{};
  }

  const Program& program_;
  LeakageClause* clause_;
  LeakageTrace& trace_;
  PredictionClause* predictor_;
  const SpecConfig& config_;
  const ExploreOptions& options_;
  ExploreStats& stats_;
  uint64_t clock_ = 0;
};

}  // namespace

void set_engine_param(SpecConfig& config, std::string_view key, uint64_t value) {
  if (key == "window") {
    config.window = value;
  } else if (key == "max_nesting") {
    config.max_nesting = value;
  } else if (key == "rollback") {
    if (value > 1) throw std::invalid_argument("rollback must be 0 or 1");
    config.rollback_leakage_state = value == 1;
  } else {
    throw std::invalid_argument("unknown engine parameter '" + std::string(key) + "'");
  }
}

std::span<const std::string_view> engine_param_names() { return kEngineParams; }

RunResult explore(MachineState& state, const Program& program, LeakageClause* clause, LeakageTrace& trace,
                  PredictionClause* predictor, const SpecConfig& config, const ExploreOptions& options,
                  ExploreStats* stats) {
  ExploreStats local;
  Engine engine(program, clause, trace, predictor, config, options, stats ? *stats : local);
  RunResult result{Termination::Halted, 0, std::nullopt};
  try {
    while (!state.halted) {
      if (result.steps == options.max_steps) {
        result.reason = Termination::BudgetExceeded;
        result.error = ExecError{ErrorKind::BudgetExceeded, state.pc,
                                 "step budget of " + std::to_string(options.max_steps) + " exhausted"};
        return result;
      }
      if (auto err = engine.execute(state, 0)) {
        result.reason = Termination::Error;
        result.error = std::move(err);
        return result;
      }
      ++result.steps;
    }
  } catch (const DeadlineExpired&) {
    result.reason = Termination::Timeout;
    result.error = ExecError{ErrorKind::Timeout, state.pc, "deadline expired"};
  } catch (const ClauseFailure& f) {
    result.reason = Termination::Error;
    result.error = ExecError{ErrorKind::ClauseFault, f.pc, f.what};
  }
  return result;
}

}  // namespace leakcheck
