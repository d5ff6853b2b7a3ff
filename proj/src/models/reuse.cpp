// Computation reuse: per-instruction memoization tables with LRU replacement.

#include <list>
#include <unordered_map>

#include "clauses.hpp"

namespace leakcheck::models {

namespace {

using Key = std::vector<uint64_t>;

// An n-way set of keys ordered most recently used first; ways == 0 means
// unbounded.
class LruSet {
 public:
  // Returns true on a hit. Either way the key ends up most recently used.
  bool touch(const Key& key, uint64_t ways) {
    for (auto it = keys_.begin(); it != keys_.end(); ++it) {
      if (*it == key) {
        keys_.splice(keys_.begin(), keys_, it);
        return true;
      }
    }
    keys_.push_front(key);
    if (ways != 0 && keys_.size() > ways) keys_.pop_back();
    return false;
  }

 private:
  std::list<Key> keys_;
};

class MemoTable {
 public:
  bool touch(uint64_t pc, const Key& key, uint64_t ways) { return sets_[pc].touch(key, ways); }

 private:
  std::unordered_map<uint64_t, LruSet> sets_;
};

class ComputationReuse : public ClauseBase<ComputationReuse> {
 public:
  ComputationReuse(bool with_addresses, const ModelParams& p)
      : with_addresses_(with_addresses), ways_(p.cr_ways), caching_ops_(p.caching_ops) {}

  std::string_view name() const override { return with_addresses_ ? "cra" : "cr"; }

  std::optional<Observation> observe(const MicroOp& uop, const MachineState&) override {
    const uint64_t pc = uop.ctx.pc;
    if (const auto* e = uop.as<ExprUop>()) {
      if (!caching_ops_.count(e->op)) return std::nullopt;
      return lookup(exprs_, pc, static_cast<uint64_t>(e->op), {e->values[0], e->values[1]});
    }
    if (!with_addresses_) return std::nullopt;
    if (const auto* a = uop.as<AddrUop>()) {
      Key key{a->base, a->index.value_or(0), a->scale, static_cast<uint64_t>(static_cast<int64_t>(a->offset))};
      return lookup(addrs_, pc, kReuseAddrTable, key);
    }
    if (const auto* ld = uop.as<LoadUop>()) return lookup(loads_, pc, kReuseLoadTable, {ld->address});
    return std::nullopt;
  }

 private:
  std::optional<Observation> lookup(MemoTable& table, uint64_t pc, uint64_t discriminant, const Key& key) {
    if (!table.touch(pc, key, ways_)) return std::nullopt;
    Observation obs{"cr", {discriminant}};
    obs.payload.insert(obs.payload.end(), key.begin(), key.end());
    return obs;
  }

  bool with_addresses_;
  uint64_t ways_;
  std::set<Mnemonic> caching_ops_;
  MemoTable exprs_;
  MemoTable addrs_;
  MemoTable loads_;
};

}  // namespace

std::unique_ptr<LeakageClause> make_computation_reuse(bool with_addresses, const ModelParams& params) {
  return std::make_unique<ComputationReuse>(with_addresses, params);
}

}  // namespace leakcheck::models
