// Constant-time, silent-store and register-file-compression clauses.

#include "clauses.hpp"
#include "leakcheck/range_set.hpp"

namespace leakcheck {

std::optional<Observation> ct_observe(const MicroOp& uop) {
  if (const auto* ld = uop.as<LoadUop>()) return Observation{"load", {ld->address}};
  if (const auto* st = uop.as<StoreUop>()) return Observation{"store", {st->address}};
  if (const auto* j = uop.as<JumpUop>()) {
    return Observation{"jump", {j->taken ? j->target : uop.ctx.pc + uop.ctx.size}};
  }
  return std::nullopt;
}

std::optional<Observation> rfc_observe(RegisterCompressionVariant variant, const MicroOp& uop,
                                       const MachineState& state, const ModelParams& params) {
  const auto* w = uop.as<WriteUop>();
  if (!w || w->reg >= kNumRegisters) return std::nullopt;
  auto other_matches = [&](auto pred) {
    for (unsigned r = 0; r < kNumRegisters; ++r) {
      if (r != w->reg && pred(state.regs[r])) return true;
    }
    return false;
  };
  switch (variant) {
    case RegisterCompressionVariant::RFC:
      if (other_matches([&](uint64_t v) { return v == w->value; })) return Observation{"rfc", {w->reg, w->value}};
      break;
    case RegisterCompressionVariant::RFC0:
      if (w->value == 0 && other_matches([](uint64_t v) { return v == 0; })) {
        return Observation{"rfc", {w->reg, w->value}};
      }
      break;
    case RegisterCompressionVariant::NRFC: {
      const uint64_t limit = params.narrow_rfc_limit;
      if (w->value < limit && other_matches([&](uint64_t v) { return v < limit; })) return Observation{"rfc", {w->reg}};
      break;
    }
  }
  return std::nullopt;
}

namespace models {

namespace {

class ConstantTime : public ClauseBase<ConstantTime> {
 public:
  std::string_view name() const override { return "ct"; }
  std::optional<Observation> observe(const MicroOp& uop, const MachineState&) override { return ct_observe(uop); }
};

class SilentStore : public ClauseBase<SilentStore> {
 public:
  explicit SilentStore(SilentStoreVariant v) : variant_(v) {}

  std::string_view name() const override {
    switch (variant_) {
      case SilentStoreVariant::SS:
        return "ss";
      case SilentStoreVariant::SSI:
        return "ssi";
      case SilentStoreVariant::SSI0:
        return "ssi0";
    }
    return "ss";
  }

  void on_start(const StartInfo& info) override {
    for (const auto& r : info.initialized) initialized_.insert(r.address, r.length);
  }

  std::optional<Observation> observe(const MicroOp& uop, const MachineState& state) override {
    const auto* st = uop.as<StoreUop>();
    if (!st) return std::nullopt;
    const uint64_t current = state.mem.read(st->address, st->size);
    const bool was_init = initialized_.contains(st->address, st->size);
    initialized_.insert(st->address, st->size);
    bool silent = st->value == current;
    if (variant_ == SilentStoreVariant::SSI) silent = silent && was_init;
    if (variant_ == SilentStoreVariant::SSI0) silent = silent && was_init && st->value == 0;
    if (!silent) return std::nullopt;
    return Observation{"ss", {st->address, st->value}};
  }

 private:
  SilentStoreVariant variant_;
  RangeSet initialized_;
};

class RegisterCompression : public ClauseBase<RegisterCompression> {
 public:
  RegisterCompression(RegisterCompressionVariant v, const ModelParams& p) : variant_(v), params_(p) {}

  std::string_view name() const override {
    switch (variant_) {
      case RegisterCompressionVariant::RFC:
        return "rfc";
      case RegisterCompressionVariant::RFC0:
        return "rfc0";
      case RegisterCompressionVariant::NRFC:
        return "nrfc";
    }
    return "rfc";
  }

  std::optional<Observation> observe(const MicroOp& uop, const MachineState& state) override {
    return rfc_observe(variant_, uop, state, params_);
  }

 private:
  RegisterCompressionVariant variant_;
  ModelParams params_;
};

}  // namespace

std::unique_ptr<LeakageClause> make_ct() { return std::make_unique<ConstantTime>(); }

std::unique_ptr<LeakageClause> make_silent_store(SilentStoreVariant variant) {
  return std::make_unique<SilentStore>(variant);
}

std::unique_ptr<LeakageClause> make_register_compression(RegisterCompressionVariant variant, const ModelParams& params) {
  return std::make_unique<RegisterCompression>(variant, params);
}

}  // namespace models
}  // namespace leakcheck
