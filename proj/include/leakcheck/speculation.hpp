#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "leakcheck/leakage.hpp"
#include "leakcheck/machine.hpp"

namespace leakcheck {

struct Prediction {
  enum class Kind { PC, REG, MEM };

  Kind kind = Kind::PC;
  uint64_t address = 0;  // PC target or MEM address
  uint8_t reg = 0;
  uint8_t size = 0;
  uint64_t value = 0;

  static Prediction pc(uint64_t target) { return {Kind::PC, target, 0, 0, 0}; }
  static Prediction reg_value(uint8_t reg, uint64_t value) { return {Kind::REG, 0, reg, 0, value}; }
  static Prediction mem(uint64_t addr, uint8_t size, uint64_t value) { return {Kind::MEM, addr, 0, size, value}; }

  bool operator==(const Prediction&) const = default;
};

/// Produces speculative predictions at micro-op events. Handlers see the
/// machine state before the current instruction commits.
class PredictionClause {
 public:
  virtual ~PredictionClause() = default;
  virtual std::string_view name() const = 0;
  virtual std::vector<Prediction> predict(const MicroOp& uop, const MachineState& state) = 0;
};

struct PredictorParams {
  uint64_t rsb_size = 16;
  uint64_t stl_size = 16;

  void validate() const;
};

struct PredictorInfo {
  std::string_view name;
  std::string_view summary;
  std::vector<std::string_view> params;
};

std::span<const PredictorInfo> predictors();
const PredictorInfo* find_predictor(std::string_view name);

/// Sets RSB_SIZE or STL_SIZE. Throws std::invalid_argument when the named
/// predictor does not take that parameter.
void set_predictor_param(PredictorParams& params, std::string_view predictor, std::string_view key, uint64_t value);

class UnknownPredictor : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::unique_ptr<PredictionClause> make_predictor(std::string_view name, const PredictorParams& params = {});

struct SpecConfig {
  uint64_t window = 64;
  uint64_t max_nesting = 1;  // 0 disables speculation
  // Restore leakage-clause state when a speculative path is squashed.
  bool rollback_leakage_state = false;

  void validate() const;
};

/// Engine parameters by name: window, max_nesting, rollback (0 or 1).
void set_engine_param(SpecConfig& config, std::string_view key, uint64_t value);
std::span<const std::string_view> engine_param_names();

struct ExploreOptions {
  uint64_t max_steps = 100000;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct ExploreStats {
  uint64_t speculative_paths = 0;
  uint64_t speculative_steps = 0;
};

/// Runs the program architecturally from `state`, exploring every surviving
/// misprediction for up to `config.window` instructions before resuming.
///
/// Observations of `clause` (may be null) at every depth are appended to
/// `trace`. `predictor` may be null, which is the same as seq. On return the
/// architectural state is what a run without speculation would produce,
/// unless the result is Timeout or a clause fault.
RunResult explore(MachineState& state, const Program& program, LeakageClause* clause, LeakageTrace& trace,
                  PredictionClause* predictor, const SpecConfig& config, const ExploreOptions& options = {},
                  ExploreStats* stats = nullptr);

}  // namespace leakcheck
