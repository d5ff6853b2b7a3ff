// Computation simplification and operand packing.

#include <deque>

#include "clauses.hpp"

namespace leakcheck {

namespace {

bool zero_or_one(uint64_t v) { return v <= 1; }
bool zero_or_all1(uint64_t v) { return v == 0 || v == kAll1; }

bool cs_trivial(Mnemonic op, uint64_t v1, uint64_t v2) {
  switch (op) {
    case Mnemonic::Add:
    case Mnemonic::Shl:
    case Mnemonic::Shr:
    case Mnemonic::Sar:
    case Mnemonic::Xor:
      return v1 == 0 || v2 == 0;
    case Mnemonic::Sub:
      return v2 == 0 || v1 == v2;
    case Mnemonic::Mul:
      return zero_or_one(v1) || zero_or_one(v2);
    case Mnemonic::Udiv:
      return v1 == 0 || v2 == 1 || v1 == v2;
    case Mnemonic::And:
    case Mnemonic::Or:
      return zero_or_all1(v1) || zero_or_all1(v2) || v1 == v2;
    default:
      return false;
  }
}

bool cst_trivial(Mnemonic op, uint64_t v1, uint64_t v2) {
  switch (op) {
    case Mnemonic::Mul:
    case Mnemonic::And:
      return v1 == 0 || v2 == 0;
    case Mnemonic::Or:
      return v1 == kAll1 || v2 == kAll1;
    case Mnemonic::Udiv:
    case Mnemonic::Shl:
    case Mnemonic::Shr:
    case Mnemonic::Sar:
      return v1 == 0;
    default:
      return false;
  }
}

uint64_t op_code(Mnemonic m) { return static_cast<uint64_t>(m); }

}  // namespace

std::optional<Observation> cs_observe(SimplificationVariant variant, const MicroOp& uop, const ModelParams& params) {
  const auto* e = uop.as<ExprUop>();
  if (!e) return std::nullopt;
  const auto [v1, v2] = e->values;
  switch (variant) {
    case SimplificationVariant::CS:
      if (cs_trivial(e->op, v1, v2)) return Observation{"cs", {op_code(e->op), v1, v2}};
      break;
    case SimplificationVariant::CST:
      if (cst_trivial(e->op, v1, v2)) return Observation{"cs", {op_code(e->op), v1, v2}};
      break;
    case SimplificationVariant::CSN:
      if (e->op == Mnemonic::Mul && v1 < params.narrow_cs_limit && v2 < params.narrow_cs_limit) {
        return Observation{"cs", {op_code(e->op)}};
      }
      break;
  }
  return std::nullopt;
}

namespace models {

namespace {

class Simplification : public ClauseBase<Simplification> {
 public:
  Simplification(SimplificationVariant v, const ModelParams& p) : variant_(v), params_(p) {}

  std::string_view name() const override {
    switch (variant_) {
      case SimplificationVariant::CS:
        return "cs";
      case SimplificationVariant::CST:
        return "cst";
      case SimplificationVariant::CSN:
        return "csn";
    }
    return "cs";
  }

  std::optional<Observation> observe(const MicroOp& uop, const MachineState&) override {
    return cs_observe(variant_, uop, params_);
  }

 private:
  SimplificationVariant variant_;
  ModelParams params_;
};

// Pairs narrow-operand operations of the same kind that are in flight within
// OP_CTX_SIZE ticks of each other.
class OperandPacking : public ClauseBase<OperandPacking> {
 public:
  explicit OperandPacking(const ModelParams& p) : ctx_size_(p.op_ctx_size), limit_(p.op_narrow_limit) {}

  std::string_view name() const override { return "op"; }

  std::optional<Observation> observe(const MicroOp& uop, const MachineState& state) override {
    const auto* e = uop.as<ExprUop>();
    if (!e || e->values[0] >= limit_ || e->values[1] >= limit_) return std::nullopt;
    // Entries recorded on a squashed path can carry a tick ahead of the current one.
    while (!window_.empty() && state.tick >= window_.front().tick && state.tick - window_.front().tick >= ctx_size_) {
      window_.pop_front();
    }
    for (auto it = window_.begin(); it != window_.end(); ++it) {
      if (it->op == e->op) {
        window_.erase(it);
        return Observation{"op", {op_code(e->op), op_code(e->op)}};
      }
    }
    window_.push_back({state.tick, e->op});
    return std::nullopt;
  }

 private:
  struct Entry {
    uint64_t tick;
    Mnemonic op;
  };
  uint64_t ctx_size_;
  uint64_t limit_;
  std::deque<Entry> window_;
};

}  // namespace

std::unique_ptr<LeakageClause> make_simplification(SimplificationVariant variant, const ModelParams& params) {
  return std::make_unique<Simplification>(variant, params);
}

std::unique_ptr<LeakageClause> make_operand_packing(const ModelParams& params) {
  return std::make_unique<OperandPacking>(params);
}

}  // namespace models
}  // namespace leakcheck
