// Built-in prediction clauses.

#include <algorithm>
#include <array>
#include <deque>
#include <string>

#include "leakcheck/speculation.hpp"

namespace leakcheck {

namespace {

const std::array<PredictorInfo, 6> kPredictors = {{
    {"seq", "no speculation", {}},
    {"pht", "conditional branches take the opposite direction", {}},
    {"sls", "straight-line speculation past every jump", {}},
    {"stl", "loads bypass older stores and read stale data", {"STL_SIZE"}},
    {"rsb-circ", "returns predicted by a circular return stack buffer", {"RSB_SIZE"}},
    {"rsb-bot", "returns predicted by a return stack buffer that drops its oldest entry", {"RSB_SIZE"}},
}};

uint64_t fall_through(const MicroOp& uop) { return uop.ctx.pc + uop.ctx.size; }

class Seq : public PredictionClause {
 public:
  std::string_view name() const override { return "seq"; }
  std::vector<Prediction> predict(const MicroOp&, const MachineState&) override { return {}; }
};

class Pht : public PredictionClause {
 public:
  std::string_view name() const override { return "pht"; }
  std::vector<Prediction> predict(const MicroOp& uop, const MachineState&) override {
    const auto* j = uop.as<JumpUop>();
    if (!j || uop.ctx.group != InsnGroup::Jump) return {};
    if (uop.ctx.mnemonic != Mnemonic::Jz && uop.ctx.mnemonic != Mnemonic::Jnz) return {};
    return {Prediction::pc(j->taken ? fall_through(uop) : j->target)};
  }
};

class Sls : public PredictionClause {
 public:
  std::string_view name() const override { return "sls"; }
  std::vector<Prediction> predict(const MicroOp& uop, const MachineState&) override {
    if (!uop.as<JumpUop>()) return {};
    return {Prediction::pc(fall_through(uop))};
  }
};

class Stl : public PredictionClause {
 public:
  explicit Stl(uint64_t size) : size_(size) {}
  std::string_view name() const override { return "stl"; }

  std::vector<Prediction> predict(const MicroOp& uop, const MachineState& state) override {
    if (const auto* st = uop.as<StoreUop>()) {
      buffer_.push_back({st->address, st->size, state.mem.read(st->address, st->size)});
      if (buffer_.size() > size_) buffer_.pop_front();
      return {};
    }
    std::vector<Prediction> out;
    if (const auto* ld = uop.as<LoadUop>()) {
      for (const auto& e : buffer_) {
        if (e.address == ld->address && e.size == ld->size) out.push_back(Prediction::mem(e.address, e.size, e.old));
      }
    }
    return out;
  }

 private:
  struct Entry {
    uint64_t address;
    uint8_t size;
    uint64_t old;
  };
  uint64_t size_;
  std::deque<Entry> buffer_;
};

class RsbCircular : public PredictionClause {
 public:
  explicit RsbCircular(uint64_t size) : stack_(size, 0) {}
  std::string_view name() const override { return "rsb-circ"; }

  std::vector<Prediction> predict(const MicroOp& uop, const MachineState&) override {
    if (!uop.as<JumpUop>()) return {};
    if (uop.ctx.group == InsnGroup::Call) {
      stack_[idx_] = fall_through(uop);
      idx_ = (idx_ + 1) % stack_.size();
    } else if (uop.ctx.group == InsnGroup::Ret) {
      idx_ = (idx_ + stack_.size() - 1) % stack_.size();
      return {Prediction::pc(stack_[idx_])};
    }
    return {};
  }

 private:
  std::vector<uint64_t> stack_;
  size_t idx_ = 0;
};

class RsbBottom : public PredictionClause {
 public:
  explicit RsbBottom(uint64_t size) : size_(size) {}
  std::string_view name() const override { return "rsb-bot"; }

  std::vector<Prediction> predict(const MicroOp& uop, const MachineState&) override {
    if (!uop.as<JumpUop>()) return {};
    if (uop.ctx.group == InsnGroup::Call) {
      stack_.push_back(fall_through(uop));
      if (stack_.size() > size_) stack_.pop_front();
    } else if (uop.ctx.group == InsnGroup::Ret && !stack_.empty()) {
      uint64_t target = stack_.back();
      stack_.pop_back();
      return {Prediction::pc(target)};
    }
    return {};
  }

 private:
  uint64_t size_;
  std::deque<uint64_t> stack_;
};

}  // namespace

void PredictorParams::validate() const {
  if (rsb_size == 0) throw std::invalid_argument("RSB_SIZE must be positive");
  if (stl_size == 0) throw std::invalid_argument("STL_SIZE must be positive");
}

std::span<const PredictorInfo> predictors() { return kPredictors; }

const PredictorInfo* find_predictor(std::string_view name) {
  auto it = std::find_if(kPredictors.begin(), kPredictors.end(), [&](const auto& p) { return p.name == name; });
  return it == kPredictors.end() ? nullptr : &*it;
}

void set_predictor_param(PredictorParams& params, std::string_view predictor, std::string_view key, uint64_t value) {
  const auto* info = find_predictor(predictor);
  if (!info) throw UnknownPredictor("unknown predictor '" + std::string(predictor) + "'");
  if (std::find(info->params.begin(), info->params.end(), key) == info->params.end()) {
    throw std::invalid_argument("predictor '" + std::string(predictor) + "' has no parameter '" + std::string(key) +
                                "'");
  }
  (key == "RSB_SIZE" ? params.rsb_size : params.stl_size) = value;
}

std::unique_ptr<PredictionClause> make_predictor(std::string_view name, const PredictorParams& params) {
  params.validate();
  if (name == "seq") return std::make_unique<Seq>();
  if (name == "pht") return std::make_unique<Pht>();
  if (name == "sls") return std::make_unique<Sls>();
  if (name == "stl") return std::make_unique<Stl>(params.stl_size);
  if (name == "rsb-circ") return std::make_unique<RsbCircular>(params.rsb_size);
  if (name == "rsb-bot") return std::make_unique<RsbBottom>(params.rsb_size);
  throw UnknownPredictor("unknown predictor '" + std::string(name) + "'");
}

}  // namespace leakcheck
