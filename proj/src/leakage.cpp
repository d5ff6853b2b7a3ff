#include "leakcheck/leakage.hpp"

#include <charconv>
#include <sstream>

namespace leakcheck {

void TraceCollector::on_uop(const MicroOp& uop, const MachineState& state) {
  if (!clause_) return;
  if (auto obs = clause_->observe(uop, state)) {
    obs->tick = state.tick;
    obs->depth = uop.ctx.depth;
    trace_.push_back(std::move(*obs));
  }
}

bool trace_equal(const LeakageTrace& a, const LeakageTrace& b) { return a == b; }

std::optional<Divergence> first_divergence(const LeakageTrace& a, const LeakageTrace& b) {
  size_t n = std::min(a.size(), b.size());
  for (size_t i = 0; i < n; ++i) {
    if (!(a[i] == b[i])) return Divergence{i, a[i], b[i]};
  }
  if (a.size() == b.size()) return std::nullopt;
  Divergence d{n, std::nullopt, std::nullopt};
  if (n < a.size()) d.left = a[n];
  if (n < b.size()) d.right = b[n];
  return d;
}

std::string format_observation(const Observation& obs) {
  std::ostringstream os;
  os << obs.tick << ' ' << obs.depth << ' ' << obs.tag;
  os << std::hex;
  for (uint64_t v : obs.payload) os << " 0x" << v;
  return os.str();
}

std::string dump_trace(const LeakageTrace& trace) {
  std::string out;
  for (const auto& obs : trace) {
    out += format_observation(obs);
    out += '\n';
  }
  return out;
}

namespace {

template <typename T>
T parse_number(std::string_view tok, int base, std::string_view what) {
  T v{};
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v, base);
  if (ec != std::errc{} || p != tok.data() + tok.size() || tok.empty()) {
    throw TraceFormatError("malformed " + std::string(what) + " '" + std::string(tok) + "'");
  }
  return v;
}

}  // namespace

Observation parse_observation(std::string_view line) {
  std::vector<std::string_view> toks;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) toks.push_back(line.substr(start, i - start));
  }
  if (toks.size() < 3) throw TraceFormatError("expected 'tick depth tag [values...]', got '" + std::string(line) + "'");
  Observation obs;
  obs.tick = parse_number<uint64_t>(toks[0], 10, "tick");
  obs.depth = parse_number<unsigned>(toks[1], 10, "depth");
  obs.tag = std::string(toks[2]);
  for (size_t k = 3; k < toks.size(); ++k) {
    std::string_view t = toks[k];
    if (t.size() < 3 || t[0] != '0' || t[1] != 'x') throw TraceFormatError("value '" + std::string(t) + "' is not 0x-hex");
    obs.payload.push_back(parse_number<uint64_t>(t.substr(2), 16, "value"));
  }
  return obs;
}

LeakageTrace parse_trace(std::string_view text) {
  LeakageTrace trace;
  size_t line_no = 0;
  size_t start = 0;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(start, end - start);
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
      try {
        trace.push_back(parse_observation(line));
      } catch (const TraceFormatError& e) {
        throw TraceFormatError("line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    start = end + 1;
  }
  return trace;
}

}  // namespace leakcheck
