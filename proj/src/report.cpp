#include "leakcheck/report.hpp"

#include <sstream>

namespace leakcheck {

namespace {

std::string obs_or_end(const std::optional<Observation>& o) { return o ? format_observation(*o) : "end"; }

}  // namespace

std::string format_machine(const Verdict& v, const ReportContext& ctx) {
  std::ostringstream os;
  os << "RESULT " << ctx.program << ' ' << ctx.leakage << ' ' << ctx.predictor << ' ' << outcome_name(v.outcome)
     << " n=" << ctx.n << " seed=" << ctx.seed << " passed=" << v.cases_passed;
  switch (v.outcome) {
    case Outcome::Secure:
      os << "\n";
      break;
    case Outcome::Leak: {
      const Divergence& d = *v.divergence;
      const Observation& witness = d.left ? *d.left : *d.right;
      os << " case=" << v.case_index << " index=" << d.index << " tag=" << witness.tag << "\n";
      os << "ASSIGN a " << to_hex(concat_bytes(v.a)) << "\n";
      os << "ASSIGN b " << to_hex(concat_bytes(v.b)) << "\n";
      os << "OBS a " << obs_or_end(d.left) << "\n";
      os << "OBS b " << obs_or_end(d.right) << "\n";
      break;
    }
    case Outcome::Timeout:
    case Outcome::Error:
      os << " case=" << v.case_index << "\n";
      os << "ERROR " << (v.error ? v.error->describe() : std::string("unknown")) << "\n";
      break;
  }
  return os.str();
}

std::string format_human(const Verdict& v, const ReportContext& ctx, const ResolvedInterface& iface) {
  std::ostringstream os;
  os << ctx.program << " under leakage '" << ctx.leakage << "' and predictor '" << ctx.predictor << "' (seed "
     << ctx.seed << ", " << ctx.n << " cases): ";
  switch (v.outcome) {
    case Outcome::Secure:
      os << "no leak found in " << v.cases_passed << " cases\n";
      break;
    case Outcome::Leak: {
      const Divergence& d = *v.divergence;
      os << "LEAK in case " << v.case_index << "\n";
      os << "  traces diverge at observation " << d.index << "\n";
      os << "    a: " << obs_or_end(d.left) << "\n";
      os << "    b: " << obs_or_end(d.right) << "\n";
      const auto& inputs = iface.spec.inputs;
      for (size_t i = 0; i < inputs.size(); ++i) {
        os << "  " << (inputs[i].secrecy == Secrecy::Secret ? "secret " : "public ") << inputs[i].name << ": "
           << to_hex(v.a.values[i]);
        if (v.a.values[i] != v.b.values[i]) os << " vs " << to_hex(v.b.values[i]);
        os << "\n";
      }
      break;
    }
    case Outcome::Timeout:
      os << "timed out in case " << v.case_index << " after " << v.cases_passed << " passing cases\n";
      break;
    case Outcome::Error:
      os << "execution error in case " << v.case_index << ": " << (v.error ? v.error->describe() : "unknown") << "\n";
      break;
  }
  return os.str();
}

}  // namespace leakcheck
