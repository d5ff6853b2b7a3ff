#include "leakcheck/harness.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace leakcheck {

uint64_t SplitMix64::mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

uint64_t SplitMix64::next() {
  state_ += 0x9e3779b97f4a7c15ULL;
  return mix64(state_);
}

SplitMix64 case_stream(uint64_t seed, uint64_t case_index, Stream stream) {
  return SplitMix64(SplitMix64::mix64(SplitMix64::mix64(seed) + 2 * case_index + static_cast<uint64_t>(stream)));
}

namespace {

std::vector<uint8_t> random_bytes(SplitMix64& rng, uint64_t length) {
  std::vector<uint8_t> out(length);
  uint64_t word = 0;
  for (uint64_t i = 0; i < length; ++i) {
    if (i % 8 == 0) word = rng.next();
    out[i] = static_cast<uint8_t>(word >> (8 * (i % 8)));
  }
  return out;
}

}  // namespace

InputAssignment gen_input(SplitMix64& rng, const ResolvedInterface& iface) {
  InputAssignment a;
  for (const auto& in : iface.spec.inputs) a.values.push_back(random_bytes(rng, in.length));
  return a;
}

InputAssignment mutate_secrets(const InputAssignment& a, const ResolvedInterface& iface, SplitMix64& rng) {
  InputAssignment b = a;
  const auto& inputs = iface.spec.inputs;
  for (size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].secrecy == Secrecy::Secret) b.values[i] = random_bytes(rng, inputs[i].length);
  }
  return b;
}

std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Secure:
      return "secure";
    case Outcome::Leak:
      return "leak";
    case Outcome::Timeout:
      return "timeout";
    case Outcome::Error:
      return "error";
  }
  return "error";
}

TraceRun collect_trace(const Program& program, const ResolvedInterface& iface, const InputAssignment& input,
                       const LeakageConfig& leakage, const PredictorConfig& predictor,
                       std::optional<std::chrono::steady_clock::time_point> deadline) {
  TraceRun run;
  auto clause = make_leakage_clause(leakage.name, leakage.params);
  auto pred = make_predictor(predictor.name, predictor.params);
  clause->on_start(start_info(iface));
  run.final_state = initial_state(iface, input);
  ExploreOptions opts;
  opts.max_steps = iface.spec.max_steps;
  opts.deadline = deadline;
  run.result = explore(run.final_state, program, clause.get(), run.trace, pred.get(), predictor.spec, opts, &run.stats);
  return run;
}

namespace {

using Clock = std::chrono::steady_clock;

struct CaseResult {
  Outcome outcome = Outcome::Secure;
  InputAssignment a;
  InputAssignment b;
  std::optional<Divergence> divergence;
  std::optional<ExecError> error;
};

CaseResult run_case(const Program& program, const ResolvedInterface& iface, const LeakageConfig& leakage,
                    const PredictorConfig& predictor, const CampaignOptions& options, uint64_t index,
                    Clock::time_point total_deadline) {
  CaseResult r;
  auto gen = case_stream(options.seed, index, Stream::Generate);
  auto mut = case_stream(options.seed, index, Stream::Mutate);
  r.a = gen_input(gen, iface);
  r.b = mutate_secrets(r.a, iface, mut);

  const auto now = Clock::now();
  const auto deadline = std::min(now + options.case_timeout, total_deadline);
  auto timed_out = [&](uint64_t pc) {
    r.outcome = Outcome::Timeout;
    r.error = ExecError{ErrorKind::Timeout, pc, "case " + std::to_string(index) + " exceeded its time budget"};
    return r;
  };
  if (now >= deadline) return timed_out(iface.entry_pc);

  LeakageTrace traces[2];
  const InputAssignment* inputs[2] = {&r.a, &r.b};
  for (int k = 0; k < 2; ++k) {
    TraceRun run = collect_trace(program, iface, *inputs[k], leakage, predictor, deadline);
    if (run.result.reason == Termination::Timeout) return timed_out(run.result.error ? run.result.error->pc : 0);
    if (run.result.reason != Termination::Halted) {
      r.outcome = Outcome::Error;
      r.error = run.result.error;
      if (r.error) r.error->detail = std::string(k == 0 ? "input a: " : "input b: ") + r.error->detail;
      return r;
    }
    traces[k] = std::move(run.trace);
  }
  if (auto d = first_divergence(traces[0], traces[1])) {
    r.outcome = Outcome::Leak;
    r.divergence = std::move(d);
  }
  return r;
}

}  // namespace

Verdict run_campaign(const Program& program, const ResolvedInterface& iface, const LeakageConfig& leakage,
                     const PredictorConfig& predictor, const CampaignOptions& options) {
  leakage.params.validate();
  predictor.params.validate();
  predictor.spec.validate();
  if (options.n == 0) throw std::invalid_argument("campaign needs at least one case");
  // Fail on unknown names before spending any time.
  make_leakage_clause(leakage.name, leakage.params);
  make_predictor(predictor.name, predictor.params);

  const auto total_deadline = Clock::now() + options.total_timeout;
  std::vector<std::optional<CaseResult>> results(options.n);
  std::atomic<uint64_t> next{0};
  std::atomic<uint64_t> first_failure{options.n};

  // Cases are claimed in increasing order, so every index below the lowest
  // failure is always evaluated and the verdict does not depend on timing.
  auto worker = [&] {
    for (;;) {
      const uint64_t i = next.fetch_add(1);
      if (i >= options.n || i > first_failure.load()) return;
      CaseResult r = run_case(program, iface, leakage, predictor, options, i, total_deadline);
      if (r.outcome != Outcome::Secure) {
        uint64_t cur = first_failure.load();
        while (i < cur && !first_failure.compare_exchange_weak(cur, i)) {
        }
      }
      results[i] = std::move(r);
    }
  };

  const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(options.n)));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  Verdict v;
  for (uint64_t i = 0; i < options.n; ++i) {
    CaseResult& r = *results[i];
    if (r.outcome == Outcome::Secure) continue;
    v.outcome = r.outcome;
    v.cases_passed = i;
    v.case_index = i;
    v.a = std::move(r.a);
    v.b = std::move(r.b);
    v.divergence = std::move(r.divergence);
    v.error = std::move(r.error);
    return v;
  }
  v.outcome = Outcome::Secure;
  v.cases_passed = options.n;
  return v;
}

InputAssignment with_secret_value(const ResolvedInterface& iface, const InputAssignment& base, uint64_t value) {
  InputAssignment out = base;
  unsigned shift = 0;
  const auto& inputs = iface.spec.inputs;
  for (size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].secrecy != Secrecy::Secret) continue;
    for (auto& byte : out.values[i]) {
      byte = shift < 64 ? static_cast<uint8_t>(value >> shift) : 0;
      shift += 8;
    }
  }
  return out;
}

OracleResult brute_force_oracle(const Program& program, const ResolvedInterface& iface, const InputAssignment& fixed,
                                const LeakageConfig& leakage, const PredictorConfig& predictor) {
  if (iface.secret_bytes * 8 > 16) {
    throw std::invalid_argument("brute-force oracle supports at most 16 secret bits, interface has " +
                                std::to_string(iface.secret_bytes * 8));
  }
  OracleResult out;
  const uint64_t count = uint64_t{1} << (iface.secret_bytes * 8);
  LeakageTrace reference;
  for (uint64_t v = 0; v < count; ++v) {
    TraceRun run = collect_trace(program, iface, with_secret_value(iface, fixed, v), leakage, predictor);
    ++out.secrets_checked;
    if (run.result.reason != Termination::Halted) {
      out.error = run.result.error;
      return out;
    }
    if (v == 0) {
      reference = std::move(run.trace);
    } else if (!trace_equal(reference, run.trace)) {
      out.interferent = true;
      out.witness = {0, v};
      return out;
    }
  }
  return out;
}

}  // namespace leakcheck
