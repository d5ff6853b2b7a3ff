#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "leakcheck/harness.hpp"

namespace leakcheck {

enum class Expectation { Leak, Secure, Unspecified };
std::string_view expectation_name(Expectation e);

/// `expected` file: `seed N` and `n N` lines, then rules
///   <leakage|*> <predictor|*> <leak|secure|unspecified> [tag]
/// A cell takes the last rule that matches it; unmatched cells are
/// unspecified. For leak cells, a tag requires the first divergent
/// observation to carry it.
struct Manifest {
  struct Rule {
    std::string leakage;
    std::string predictor;
    Expectation expect = Expectation::Unspecified;
    std::string tag;
  };
  struct Cell {
    Expectation expect = Expectation::Unspecified;
    std::string tag;
  };

  uint64_t seed = 1;
  uint64_t n = 100;
  std::vector<Rule> rules;

  Cell lookup(std::string_view leakage, std::string_view predictor) const;
};

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Manifest parse_manifest(std::string_view text);

struct CorpusEntry {
  std::string name;
  std::filesystem::path dir;
  std::string source;
  Program program;
  ResolvedInterface iface;
  Manifest manifest;
};

/// $LEAKCHECK_CORPUS if set, else the directory configured at build time.
std::filesystem::path default_corpus_dir();

/// Loads `<dir>/prog.asm`, `<dir>/interface` and `<dir>/expected`.
CorpusEntry load_entry(const std::filesystem::path& dir);

/// Every subdirectory of `dir`, sorted by name.
std::vector<CorpusEntry> load_corpus(const std::filesystem::path& dir = default_corpus_dir());

enum class CellStatus { Confirmed, Violated, Skipped };
std::string_view cell_status_name(CellStatus s);

struct CellReport {
  std::string program;
  std::string leakage;
  std::string predictor;
  Manifest::Cell expected;
  CellStatus status = CellStatus::Skipped;
  Verdict verdict;
};

/// Runs a campaign for every specified (leakage, predictor) cell with the
/// manifest's seed and case count. Unspecified cells are reported as skipped.
std::vector<CellReport> verify_manifest(const std::vector<CorpusEntry>& entries, unsigned jobs = 1);

// The verdict class a campaign result confirms, if any.
bool cell_confirmed(const Manifest::Cell& expected, const Verdict& v);

}  // namespace leakcheck
