// leakcheck: relational side-channel testing from the command line.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "leakcheck/corpus.hpp"
#include "leakcheck/report.hpp"

namespace fs = std::filesystem;
using namespace leakcheck;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitLeak = 1;
constexpr int kExitUsage = 2;
constexpr int kExitFailed = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw UsageError("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct Target {
  std::string name;
  Program program;
  ResolvedInterface iface;
};

// PROGRAM is an assembly file, a corpus entry directory, or the name of an
// entry in the corpus directory.
Target load_target(const std::string& program, const std::string& interface_path, const std::string& corpus) {
  fs::path asm_path;
  fs::path iface_path = interface_path;
  std::string name;
  if (fs::is_regular_file(program)) {
    asm_path = program;
    name = fs::path(program).stem().string();
    if (iface_path.empty() && fs::is_regular_file(asm_path.parent_path() / "interface")) {
      iface_path = asm_path.parent_path() / "interface";
    }
  } else {
    fs::path dir = fs::is_directory(program) ? fs::path(program)
                                             : (corpus.empty() ? default_corpus_dir() : fs::path(corpus)) / program;
    if (!fs::is_regular_file(dir / "prog.asm")) throw UsageError("no program file or corpus entry named '" + program + "'");
    asm_path = dir / "prog.asm";
    name = dir.filename().string();
    if (iface_path.empty()) iface_path = dir / "interface";
  }
  Target t;
  t.name = name;
  try {
    t.program = parse_program(read_file(asm_path));
  } catch (const ParseError& e) {
    throw UsageError(asm_path.string() + ": " + e.what());
  }
  LabeledInterface iface;
  if (!iface_path.empty()) iface = parse_interface(read_file(iface_path));
  t.iface = resolve_interface(iface, t.program);
  return t;
}

uint64_t parse_value(const std::string& s) {
  try {
    size_t used = 0;
    uint64_t v = std::stoull(s, &used, 0);
    if (used == s.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw UsageError("malformed parameter value '" + s + "'");
}

struct ModelOptions {
  std::string leakage = "ct";
  std::string predictor = "seq";
  std::vector<std::string> params;

  void add(CLI::App* cmd) {
    cmd->add_option("--leakage,-l", leakage, "Leakage model")->capture_default_str();
    cmd->add_option("--predictor,-p", predictor, "Prediction clause")->capture_default_str();
    cmd->add_option("--param", params, "Parameter override NAME=VALUE (repeatable)");
  }

  // Validates names and routes every override to the engine, the predictor
  // or the leakage model, in that order.
  std::pair<LeakageConfig, PredictorConfig> resolve() const {
    if (!find_leakage_model(leakage)) throw UsageError("unknown leakage model '" + leakage + "'");
    if (!find_predictor(predictor)) throw UsageError("unknown predictor '" + predictor + "'");
    LeakageConfig lc{leakage, {}};
    PredictorConfig pc;
    pc.name = predictor;
    const auto* pinfo = find_predictor(predictor);
    const auto* minfo = find_leakage_model(leakage);
    auto has = [](const auto& list, std::string_view key) {
      return std::find(list.begin(), list.end(), key) != list.end();
    };
    for (const auto& p : params) {
      auto eq = p.find('=');
      if (eq == std::string::npos) throw UsageError("parameter '" + p + "' is not NAME=VALUE");
      std::string key = p.substr(0, eq);
      uint64_t value = parse_value(p.substr(eq + 1));
      try {
        if (has(engine_param_names(), key)) {
          set_engine_param(pc.spec, key, value);
        } else if (has(pinfo->params, key)) {
          set_predictor_param(pc.params, predictor, key, value);
        } else if (has(minfo->params, key)) {
          set_model_param(lc.params, leakage, key, value);
        } else {
          throw UsageError("unknown parameter '" + key + "' for leakage '" + leakage + "' and predictor '" +
                           predictor + "'");
        }
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
    }
    try {
      lc.params.validate();
      pc.params.validate();
      pc.spec.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return {lc, pc};
  }
};

int cmd_run(const std::string& program, const std::string& iface, const std::string& corpus, const ModelOptions& mo,
            const CampaignOptions& opts, const std::string& format) {
  Target t = load_target(program, iface, corpus);
  auto [lc, pc] = mo.resolve();
  Verdict v = run_campaign(t.program, t.iface, lc, pc, opts);
  ReportContext ctx{t.name, lc.name, pc.name, opts.n, opts.seed};
  std::cout << (format == "machine" ? format_machine(v, ctx) : format_human(v, ctx, t.iface));
  switch (v.outcome) {
    case Outcome::Secure:
      return kExitOk;
    case Outcome::Leak:
      return kExitLeak;
    default:
      return kExitFailed;
  }
}

int cmd_trace(const std::string& program, const std::string& iface, const std::string& corpus, const ModelOptions& mo,
              const std::optional<std::string>& input, const std::optional<uint64_t>& seed, uint64_t case_index,
              bool mutated) {
  if (input.has_value() == seed.has_value()) throw UsageError("give exactly one of --input and --seed");
  Target t = load_target(program, iface, corpus);
  auto [lc, pc] = mo.resolve();
  InputAssignment a;
  if (input) {
    try {
      a = split_bytes(t.iface, from_hex(*input));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  } else {
    auto gen = case_stream(*seed, case_index, Stream::Generate);
    a = gen_input(gen, t.iface);
    if (mutated) {
      auto mut = case_stream(*seed, case_index, Stream::Mutate);
      a = mutate_secrets(a, t.iface, mut);
    }
  }
  TraceRun run = collect_trace(t.program, t.iface, a, lc, pc);
  std::cout << dump_trace(run.trace);
  if (run.result.reason != Termination::Halted) {
    std::cerr << "error: " << (run.result.error ? run.result.error->describe() : "run did not halt") << "\n";
    return kExitFailed;
  }
  return kExitOk;
}

int cmd_diff(const std::string& a, const std::string& b) {
  LeakageTrace ta, tb;
  try {
    ta = parse_trace(read_file(a));
    tb = parse_trace(read_file(b));
  } catch (const TraceFormatError& e) {
    throw UsageError(e.what());
  }
  auto d = first_divergence(ta, tb);
  if (!d) {
    std::cout << "equal\n";
    return kExitOk;
  }
  auto show = [](const std::optional<Observation>& o) { return o ? format_observation(*o) : std::string("end"); };
  std::cout << "diverge at " << d->index << "\n";
  std::cout << "< " << show(d->left) << "\n";
  std::cout << "> " << show(d->right) << "\n";
  return kExitLeak;
}

int cmd_list() {
  const ModelParams mp;
  std::cout << "leakage models:\n";
  for (const auto& m : leakage_models()) {
    std::cout << "  " << m.name;
    for (auto p : m.params) std::cout << ' ' << p << '=' << get_model_param(mp, p);
    std::cout << "\n      " << m.summary << "\n";
  }
  const PredictorParams pp;
  std::cout << "predictors:\n";
  for (const auto& p : predictors()) {
    std::cout << "  " << p.name;
    for (auto k : p.params) std::cout << ' ' << k << '=' << (k == "RSB_SIZE" ? pp.rsb_size : pp.stl_size);
    std::cout << "\n      " << p.summary << "\n";
  }
  const SpecConfig sc;
  std::cout << "engine: window=" << sc.window << " max_nesting=" << sc.max_nesting
            << " rollback=" << (sc.rollback_leakage_state ? 1 : 0) << "\n";
  return kExitOk;
}

int cmd_verify(const std::string& corpus, unsigned jobs, bool verbose) {
  auto entries = load_corpus(corpus.empty() ? default_corpus_dir() : fs::path(corpus));
  auto cells = verify_manifest(entries, jobs);
  size_t confirmed = 0, violated = 0, skipped = 0;
  for (const auto& c : cells) {
    if (c.status == CellStatus::Skipped) {
      ++skipped;
      continue;
    }
    (c.status == CellStatus::Confirmed ? confirmed : violated)++;
    if (verbose || c.status == CellStatus::Violated) {
      std::cout << "CELL " << c.program << ' ' << c.leakage << ' ' << c.predictor << " expected="
                << expectation_name(c.expected.expect);
      if (!c.expected.tag.empty()) std::cout << ':' << c.expected.tag;
      std::cout << " got=" << outcome_name(c.verdict.outcome);
      if (c.verdict.divergence) {
        const auto& d = *c.verdict.divergence;
        std::cout << ':' << (d.left ? d.left->tag : d.right->tag);
      }
      std::cout << ' ' << cell_status_name(c.status) << "\n";
    }
  }
  std::cout << "verified " << entries.size() << " programs: " << confirmed << " confirmed, " << violated
            << " violated, " << skipped << " unspecified\n";
  return violated == 0 ? kExitOk : kExitLeak;
}

int cmd_asm(const std::string& path, bool disasm) {
  Program p;
  try {
    p = parse_program(read_file(path));
  } catch (const ParseError& e) {
    std::cerr << path << ": " << e.what() << "\n";
    return kExitUsage;
  }
  if (disasm) {
    std::cout << disassemble(p);
  } else {
    std::cout << "ok: " << p.instructions.size() << " instructions, " << p.labels.size() << " labels\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relational side-channel leakage testing"};
  app.require_subcommand(1);

  std::string program, iface, corpus, format = "human";
  ModelOptions mo;
  CampaignOptions opts;
  uint64_t case_ms = 10'000, total_ms = 600'000;

  auto* run = app.add_subcommand("run", "Run a test campaign");
  run->add_option("program", program, "Assembly file, corpus directory or corpus entry name")->required();
  run->add_option("--interface,-i", iface, "Interface file");
  run->add_option("--corpus", corpus, "Corpus directory");
  mo.add(run);
  run->add_option("--n,-n", opts.n, "Number of test cases")->capture_default_str()->check(CLI::PositiveNumber);
  run->add_option("--seed,-s", opts.seed, "Campaign seed")->capture_default_str();
  run->add_option("--jobs,-j", opts.jobs, "Parallel workers")->capture_default_str()->check(CLI::PositiveNumber);
  run->add_option("--case-timeout", case_ms, "Per-case timeout in milliseconds")->capture_default_str();
  run->add_option("--total-timeout", total_ms, "Campaign timeout in milliseconds")->capture_default_str();
  run->add_option("--format,-f", format, "Report format")->check(CLI::IsMember({"human", "machine"}))->capture_default_str();

  std::optional<std::string> input;
  std::optional<uint64_t> seed;
  uint64_t case_index = 0;
  bool mutated = false;
  auto* trace = app.add_subcommand("trace", "Dump the leakage trace of one execution");
  trace->add_option("program", program, "Assembly file, corpus directory or corpus entry name")->required();
  trace->add_option("--interface,-i", iface, "Interface file");
  trace->add_option("--corpus", corpus, "Corpus directory");
  mo.add(trace);
  trace->add_option("--input", input, "Concatenated input bytes in hex");
  trace->add_option("--seed,-s", seed, "Generate the input of a campaign case with this seed");
  trace->add_option("--case", case_index, "Case index for --seed")->capture_default_str();
  trace->add_flag("--mutated", mutated, "Use the case's secret-mutated input");

  std::string file_a, file_b;
  auto* diff = app.add_subcommand("diff", "Compare two trace dumps");
  diff->add_option("a", file_a)->required();
  diff->add_option("b", file_b)->required();

  auto* list = app.add_subcommand("list", "List leakage models and predictors");

  bool verbose = false;
  auto* verify = app.add_subcommand("verify-corpus", "Check the corpus against its expected verdicts");
  verify->add_option("--corpus", corpus, "Corpus directory");
  verify->add_option("--jobs,-j", opts.jobs, "Parallel workers per campaign")->check(CLI::PositiveNumber);
  verify->add_flag("--verbose,-v", verbose, "Print every checked cell");

  std::string asm_file;
  bool disasm = false;
  auto* assemble = app.add_subcommand("asm", "Parse and validate an assembly file");
  assemble->add_option("file", asm_file)->required();
  assemble->add_flag("--disassemble,-d", disasm, "Print the normalized program");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  opts.case_timeout = std::chrono::milliseconds(case_ms);
  opts.total_timeout = std::chrono::milliseconds(total_ms);
  try {
    if (*run) return cmd_run(program, iface, corpus, mo, opts, format);
    if (*trace) return cmd_trace(program, iface, corpus, mo, input, seed, case_index, mutated);
    if (*diff) return cmd_diff(file_a, file_b);
    if (*list) return cmd_list();
    if (*verify) return cmd_verify(corpus, opts.jobs, verbose);
    if (*assemble) return cmd_asm(asm_file, disasm);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InterfaceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const CorpusError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailed;
  }
  return kExitUsage;
}
