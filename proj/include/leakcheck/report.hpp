#pragma once

#include <string>

#include "leakcheck/harness.hpp"

namespace leakcheck {

struct ReportContext {
  std::string program;
  std::string leakage;
  std::string predictor;
  uint64_t n = 0;
  uint64_t seed = 0;
};

/// Line-oriented report. The first line is always
///   RESULT <program> <leakage> <predictor> <outcome> n=<N> seed=<S> passed=<K>
/// followed, for a leak, by ` case=<i> index=<d> tag=<tag>` on the same line
/// and then the lines
///   ASSIGN a <hex>
///   ASSIGN b <hex>
///   OBS a <tick depth tag values | end>
///   OBS b <tick depth tag values | end>
/// Timeouts and errors append ` case=<i>` and a line `ERROR <description>`.
/// Assignments are the concatenated input bytes in interface order.
std::string format_machine(const Verdict& v, const ReportContext& ctx);

std::string format_human(const Verdict& v, const ReportContext& ctx, const ResolvedInterface& iface);

}  // namespace leakcheck
