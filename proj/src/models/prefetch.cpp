// Prefetcher models: next-line, per-page stream, and data-dependent (pointer
// chasing) prefetch.

#include <algorithm>
#include <deque>
#include <unordered_map>

#include "clauses.hpp"
#include "leakcheck/range_set.hpp"

namespace leakcheck {

std::optional<Observation> pf_nextline(const MicroOp& uop, const ModelParams& params) {
  const auto* ld = uop.as<LoadUop>();
  if (!ld) return std::nullopt;
  return Observation{"pf", {(ld->address >> params.cacheline_bits) + 1}};
}

namespace models {

namespace {

class NextLinePrefetch : public ClauseBase<NextLinePrefetch> {
 public:
  explicit NextLinePrefetch(const ModelParams& p) : params_(p) {}
  std::string_view name() const override { return "pf-nl"; }
  std::optional<Observation> observe(const MicroOp& uop, const MachineState&) override {
    return pf_nextline(uop, params_);
  }

 private:
  ModelParams params_;
};

class StreamPrefetch : public ClauseBase<StreamPrefetch> {
 public:
  explicit StreamPrefetch(const ModelParams& p)
      : line_bits_(p.cacheline_bits), page_bits_(p.page_bits), hits_(p.pf_hits) {}

  std::string_view name() const override { return "pf-s"; }

  std::optional<Observation> observe(const MicroOp& uop, const MachineState&) override {
    const auto* ld = uop.as<LoadUop>();
    if (!ld) return std::nullopt;
    const uint64_t line = ld->address >> line_bits_;
    const uint64_t page = ld->address >> page_bits_;
    auto& history = pages_[page];
    if (std::find(history.begin(), history.end(), line) == history.end()) {
      history.push_back(line);
      if (history.size() > hits_) history.pop_front();
    }
    const int dir = direction(history);
    if (dir == 0) return std::nullopt;
    const uint64_t next = line + static_cast<uint64_t>(static_cast<int64_t>(dir));
    if ((next >> (page_bits_ - line_bits_)) != page) return std::nullopt;
    return Observation{"pf", {next}};
  }

 private:
  int direction(const std::deque<uint64_t>& history) const {
    if (history.size() < hits_) return 0;
    bool up = true;
    bool down = true;
    for (size_t i = 1; i < history.size(); ++i) {
      up = up && history[i] > history[i - 1];
      down = down && history[i] < history[i - 1];
    }
    return up ? 1 : down ? -1 : 0;
  }

  uint64_t line_bits_;
  uint64_t page_bits_;
  uint64_t hits_;
  std::unordered_map<uint64_t, std::deque<uint64_t>> pages_;
};

// Remembers recent (address, loaded value) pairs. A load whose address equals
// an earlier loaded value marks that earlier load as a pointer dereference;
// once the marks form a constant stride the prefetcher reads ahead along it.
class DataDependentPrefetch : public ClauseBase<DataDependentPrefetch> {
 public:
  explicit DataDependentPrefetch(const ModelParams& p)
      : history_size_(p.m1pf_size), hits_(p.pf_hits), prefetch_(p.m1pf_prefetch), word_(p.word_read_size) {}

  std::string_view name() const override { return "pf-dd"; }

  void on_start(const StartInfo& info) override {
    for (const auto& r : info.initialized) initialized_.insert(r.address, r.length);
  }

  std::optional<Observation> observe(const MicroOp& uop, const MachineState& state) override {
    if (const auto* st = uop.as<StoreUop>()) {
      initialized_.insert(st->address, st->size);
      return std::nullopt;
    }
    const auto* ld = uop.as<LoadUop>();
    if (!ld) return std::nullopt;

    uint64_t stride = 0;
    for (auto it = accesses_.rbegin(); it != accesses_.rend(); ++it) {
      if (it->value != ld->address) continue;
      marks_.push_back(it->address);
      if (marks_.size() > hits_) marks_.pop_front();
      stride = constant_stride();
      break;
    }
    accesses_.push_back({ld->address, state.mem.read(ld->address, ld->size)});
    if (accesses_.size() > history_size_) accesses_.pop_front();
    if (stride == 0) return std::nullopt;

    Observation obs{"pf", {}};
    const uint64_t last = marks_.back();
    for (uint64_t i = 0; i < prefetch_; ++i) {
      const uint64_t a = last + i * stride;
      if (!initialized_.contains(a, word_)) continue;
      obs.payload.push_back(a);
      obs.payload.push_back(state.mem.read(a, static_cast<unsigned>(word_)));
    }
    return obs;
  }

 private:
  struct Access {
    uint64_t address;
    uint64_t value;
  };

  // Common difference of the marks when the list is full and evenly spaced.
  uint64_t constant_stride() const {
    if (marks_.size() < hits_ || marks_.size() < 2) return 0;
    const uint64_t d = marks_[1] - marks_[0];
    for (size_t i = 2; i < marks_.size(); ++i) {
      if (marks_[i] - marks_[i - 1] != d) return 0;
    }
    return d;
  }

  uint64_t history_size_;
  uint64_t hits_;
  uint64_t prefetch_;
  uint64_t word_;
  RangeSet initialized_;
  std::deque<Access> accesses_;
  std::deque<uint64_t> marks_;
};

}  // namespace

std::unique_ptr<LeakageClause> make_nextline_prefetch(const ModelParams& params) {
  return std::make_unique<NextLinePrefetch>(params);
}

std::unique_ptr<LeakageClause> make_stream_prefetch(const ModelParams& params) {
  return std::make_unique<StreamPrefetch>(params);
}

std::unique_ptr<LeakageClause> make_datadep_prefetch(const ModelParams& params) {
  return std::make_unique<DataDependentPrefetch>(params);
}

}  // namespace models
}  // namespace leakcheck
