#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "leakcheck/interface.hpp"
#include "leakcheck/models.hpp"
#include "leakcheck/speculation.hpp"

namespace leakcheck {

/// SplitMix64. Each step adds 0x9e3779b97f4a7c15 to the state and returns
/// mix64(state), where mix64(z) is
///   z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9
///   z = (z ^ (z >> 27)) * 0x94d049bb133111eb
///   z ^ (z >> 31)
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t state) : state_(state) {}
  uint64_t next();
  static uint64_t mix64(uint64_t z);

 private:
  uint64_t state_;
};

enum class Stream : uint64_t { Generate = 0, Mutate = 1 };

/// The generator for one test case: state = mix64(mix64(seed) + 2 * case + stream).
SplitMix64 case_stream(uint64_t seed, uint64_t case_index, Stream stream);

/// Fills every input, in interface order, with random bytes. Each input
/// starts on a fresh 64-bit draw and consumes it little-endian byte first.
InputAssignment gen_input(SplitMix64& rng, const ResolvedInterface& iface);

/// Copies public inputs and redraws every secret input the same way
/// gen_input would.
InputAssignment mutate_secrets(const InputAssignment& a, const ResolvedInterface& iface, SplitMix64& rng);

struct LeakageConfig {
  std::string name = "ct";
  ModelParams params;
};

struct PredictorConfig {
  std::string name = "seq";
  PredictorParams params;
  SpecConfig spec;
};

struct TraceRun {
  LeakageTrace trace;
  RunResult result;
  MachineState final_state;
  ExploreStats stats;
};

/// One execution from `input` with freshly built clauses.
TraceRun collect_trace(const Program& program, const ResolvedInterface& iface, const InputAssignment& input,
                       const LeakageConfig& leakage, const PredictorConfig& predictor,
                       std::optional<std::chrono::steady_clock::time_point> deadline = std::nullopt);

struct CampaignOptions {
  uint64_t n = 100;
  uint64_t seed = 0;
  std::chrono::milliseconds case_timeout{10'000};
  std::chrono::milliseconds total_timeout{600'000};
  unsigned jobs = 1;
};

enum class Outcome { Secure, Leak, Timeout, Error };
std::string_view outcome_name(Outcome o);

struct Verdict {
  Outcome outcome = Outcome::Secure;
  uint64_t cases_passed = 0;
  // Leak, Timeout and Error refer to this case.
  uint64_t case_index = 0;
  InputAssignment a;
  InputAssignment b;
  std::optional<Divergence> divergence;
  std::optional<ExecError> error;
};

/// Relational testing: for each case, generates an input, mutates its
/// secrets, and compares the two traces. Returns at the lowest-index case
/// that leaks, times out, or fails to execute.
Verdict run_campaign(const Program& program, const ResolvedInterface& iface, const LeakageConfig& leakage,
                     const PredictorConfig& predictor, const CampaignOptions& options);

struct OracleResult {
  bool interferent = false;
  uint64_t secrets_checked = 0;
  // Two secret values whose traces differ.
  std::optional<std::pair<uint64_t, uint64_t>> witness;
  std::optional<ExecError> error;
};

/// Exhaustive non-interference check over every secret value with the public
/// bytes of `fixed` held constant. Secret value v is spread little-endian
/// over the secret inputs in interface order. Requires at most 16 secret bits.
OracleResult brute_force_oracle(const Program& program, const ResolvedInterface& iface, const InputAssignment& fixed,
                                const LeakageConfig& leakage, const PredictorConfig& predictor);

/// The assignment equal to `base` with its secret bytes taken from `value`.
InputAssignment with_secret_value(const ResolvedInterface& iface, const InputAssignment& base, uint64_t value);

}  // namespace leakcheck
