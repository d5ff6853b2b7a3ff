#include "leakcheck/corpus.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace leakcheck {

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw CorpusError("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

bool matches(const std::string& pattern, std::string_view name) { return pattern == "*" || pattern == name; }

}  // namespace

std::string_view expectation_name(Expectation e) {
  switch (e) {
    case Expectation::Leak:
      return "leak";
    case Expectation::Secure:
      return "secure";
    case Expectation::Unspecified:
      return "unspecified";
  }
  return "unspecified";
}

std::string_view cell_status_name(CellStatus s) {
  switch (s) {
    case CellStatus::Confirmed:
      return "confirmed";
    case CellStatus::Violated:
      return "violated";
    case CellStatus::Skipped:
      return "skipped";
  }
  return "skipped";
}

Manifest::Cell Manifest::lookup(std::string_view leakage, std::string_view predictor) const {
  Cell cell;
  for (const auto& r : rules) {
    if (matches(r.leakage, leakage) && matches(r.predictor, predictor)) cell = {r.expect, r.tag};
  }
  return cell;
}

Manifest parse_manifest(std::string_view text) {
  Manifest m;
  std::istringstream in{std::string(text)};
  std::string raw;
  size_t line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw CorpusError("expected line " + std::to_string(line_no) + ": " + msg);
  };
  auto number = [&](const std::string& s) {
    try {
      size_t used = 0;
      uint64_t v = std::stoull(s, &used, 0);
      if (used != s.size()) fail("malformed number '" + s + "'");
      return v;
    } catch (const std::logic_error&) {
      fail("malformed number '" + s + "'");
    }
    return uint64_t{0};
  };
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok[0] == "seed" || tok[0] == "n") {
      if (tok.size() != 2) fail("'" + tok[0] + "' takes one value");
      (tok[0] == "seed" ? m.seed : m.n) = number(tok[1]);
      continue;
    }
    if (tok.size() < 3 || tok.size() > 4) fail("expected '<leakage> <predictor> <verdict> [tag]'");
    Manifest::Rule r{tok[0], tok[1], Expectation::Unspecified, tok.size() == 4 ? tok[3] : ""};
    if (r.leakage != "*" && !find_leakage_model(r.leakage)) fail("unknown leakage model '" + r.leakage + "'");
    if (r.predictor != "*" && !find_predictor(r.predictor)) fail("unknown predictor '" + r.predictor + "'");
    if (tok[2] == "leak") {
      r.expect = Expectation::Leak;
    } else if (tok[2] == "secure") {
      r.expect = Expectation::Secure;
    } else if (tok[2] == "unspecified") {
      r.expect = Expectation::Unspecified;
    } else {
      fail("verdict must be leak, secure or unspecified, got '" + tok[2] + "'");
    }
    if (!r.tag.empty() && r.expect != Expectation::Leak) fail("only leak cells take a tag");
    m.rules.push_back(std::move(r));
  }
  if (m.n == 0) fail("n must be positive");
  return m;
}

std::filesystem::path default_corpus_dir() {
  if (const char* env = std::getenv("LEAKCHECK_CORPUS"); env && *env) return env;
  return LEAKCHECK_CORPUS_DIR;
}

CorpusEntry load_entry(const std::filesystem::path& dir) {
  CorpusEntry e;
  e.dir = dir;
  e.name = dir.filename().string();
  e.source = read_file(dir / "prog.asm");
  try {
    e.program = parse_program(e.source);
    e.iface = resolve_interface(parse_interface(read_file(dir / "interface")), e.program);
    e.manifest = parse_manifest(read_file(dir / "expected"));
  } catch (const CorpusError& err) {
    throw CorpusError(e.name + ": " + err.what());
  } catch (const std::runtime_error& err) {
    throw CorpusError(e.name + ": " + err.what());
  }
  return e;
}

std::vector<CorpusEntry> load_corpus(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw CorpusError("corpus directory " + dir.string() + " not found");
  std::vector<std::filesystem::path> dirs;
  for (const auto& d : std::filesystem::directory_iterator(dir)) {
    if (d.is_directory()) dirs.push_back(d.path());
  }
  std::sort(dirs.begin(), dirs.end());
  std::vector<CorpusEntry> out;
  for (const auto& d : dirs) out.push_back(load_entry(d));
  return out;
}

bool cell_confirmed(const Manifest::Cell& expected, const Verdict& v) {
  switch (expected.expect) {
    case Expectation::Secure:
      return v.outcome == Outcome::Secure;
    case Expectation::Leak: {
      if (v.outcome != Outcome::Leak) return false;
      if (expected.tag.empty()) return true;
      const auto& d = *v.divergence;
      return (d.left && d.left->tag == expected.tag) || (d.right && d.right->tag == expected.tag);
    }
    case Expectation::Unspecified:
      return true;
  }
  return false;
}

std::vector<CellReport> verify_manifest(const std::vector<CorpusEntry>& entries, unsigned jobs) {
  std::vector<CellReport> out;
  for (const auto& e : entries) {
    for (const auto& model : leakage_models()) {
      for (const auto& pred : predictors()) {
        CellReport r;
        r.program = e.name;
        r.leakage = model.name;
        r.predictor = pred.name;
        r.expected = e.manifest.lookup(model.name, pred.name);
        if (r.expected.expect != Expectation::Unspecified) {
          LeakageConfig lc{r.leakage, {}};
          PredictorConfig pc;
          pc.name = r.predictor;
          CampaignOptions opts;
          opts.n = e.manifest.n;
          opts.seed = e.manifest.seed;
          opts.jobs = jobs;
          r.verdict = run_campaign(e.program, e.iface, lc, pc, opts);
          r.status = cell_confirmed(r.expected, r.verdict) ? CellStatus::Confirmed : CellStatus::Violated;
        }
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

}  // namespace leakcheck
