#include <algorithm>
#include <array>

#include "clauses.hpp"

namespace leakcheck {

namespace {

using models::SilentStoreVariant;

const std::array<LeakageModelInfo, 18> kModels = {{
    {"ct", "addresses of loads and stores, resolved jump targets", {}},
    {"ss", "silent stores: a store of the value already in memory", {}},
    {"ssi", "silent stores to already-initialized memory", {}},
    {"ssi0", "silent stores of zero to already-initialized memory", {}},
    {"rfc", "register file compression: a written value already held by another register", {}},
    {"rfc0", "register file compression of zero values", {}},
    {"nrfc", "narrow register file compression", {"NARROW_RFC_LIMIT"}},
    {"cs", "computation simplification of trivial operands", {}},
    {"cst", "computation simplification, operand values that fix the result", {}},
    {"csn", "narrow multiplication", {"NARROW_CS_LIMIT"}},
    {"op", "operand packing of narrow in-flight operations", {"OP_CTX_SIZE", "OP_NARROW_LIMIT"}},
    {"cr", "computation reuse on arithmetic results", {"CR_WAYS"}},
    {"cra", "computation reuse on arithmetic, address computation and loads", {"CR_WAYS"}},
    {"cc-fpc", "cache line compression, frequent pattern compression", {}},
    {"cc-bdi", "cache line compression, base-delta-immediate", {}},
    {"pf-nl", "next-line prefetcher", {"CACHELINE_BITS"}},
    {"pf-s", "stream prefetcher", {"CACHELINE_BITS", "PAGE_BITS", "PF_HITS"}},
    {"pf-dd", "data-dependent prefetcher", {"PF_HITS", "M1PF_SIZE", "M1PF_PREFETCH", "WORD_READ_SIZE"}},
}};

template <typename Params>
auto param_slot(Params& p, std::string_view key) -> decltype(&p.narrow_rfc_limit) {
  if (key == "NARROW_RFC_LIMIT") return &p.narrow_rfc_limit;
  if (key == "NARROW_CS_LIMIT") return &p.narrow_cs_limit;
  if (key == "OP_CTX_SIZE") return &p.op_ctx_size;
  if (key == "OP_NARROW_LIMIT") return &p.op_narrow_limit;
  if (key == "CR_WAYS") return &p.cr_ways;
  if (key == "CACHELINE_BITS") return &p.cacheline_bits;
  if (key == "PAGE_BITS") return &p.page_bits;
  if (key == "PF_HITS") return &p.pf_hits;
  if (key == "M1PF_SIZE") return &p.m1pf_size;
  if (key == "M1PF_PREFETCH") return &p.m1pf_prefetch;
  if (key == "WORD_READ_SIZE") return &p.word_read_size;
  return nullptr;
}

void require_positive(uint64_t v, const char* name) {
  if (v == 0) throw std::invalid_argument(std::string(name) + " must be positive");
}

}  // namespace

void ModelParams::validate() const {
  require_positive(narrow_rfc_limit, "NARROW_RFC_LIMIT");
  require_positive(narrow_cs_limit, "NARROW_CS_LIMIT");
  require_positive(op_ctx_size, "OP_CTX_SIZE");
  require_positive(op_narrow_limit, "OP_NARROW_LIMIT");
  require_positive(cacheline_bits, "CACHELINE_BITS");
  require_positive(page_bits, "PAGE_BITS");
  require_positive(pf_hits, "PF_HITS");
  require_positive(m1pf_size, "M1PF_SIZE");
  require_positive(m1pf_prefetch, "M1PF_PREFETCH");
  require_positive(word_read_size, "WORD_READ_SIZE");
  if (cacheline_bits >= page_bits) throw std::invalid_argument("CACHELINE_BITS must be less than PAGE_BITS");
  if (page_bits >= 64) throw std::invalid_argument("PAGE_BITS must be less than 64");
  if (word_read_size > 8) throw std::invalid_argument("WORD_READ_SIZE must be at most 8");
}

std::span<const LeakageModelInfo> leakage_models() { return kModels; }

const LeakageModelInfo* find_leakage_model(std::string_view name) {
  auto it = std::find_if(kModels.begin(), kModels.end(), [&](const auto& m) { return m.name == name; });
  return it == kModels.end() ? nullptr : &*it;
}

void set_model_param(ModelParams& params, std::string_view model, std::string_view key, uint64_t value) {
  const auto* info = find_leakage_model(model);
  if (!info) throw UnknownModel("unknown leakage model '" + std::string(model) + "'");
  if (std::find(info->params.begin(), info->params.end(), key) == info->params.end()) {
    throw std::invalid_argument("leakage model '" + std::string(model) + "' has no parameter '" + std::string(key) + "'");
  }
  *param_slot(params, key) = value;
}

uint64_t get_model_param(const ModelParams& params, std::string_view key) {
  const uint64_t* slot = param_slot(params, key);
  if (!slot) throw std::invalid_argument("unknown model parameter '" + std::string(key) + "'");
  return *slot;
}

std::unique_ptr<LeakageClause> make_leakage_clause(std::string_view name, const ModelParams& params) {
  using namespace models;
  if (name == "ct") return make_ct();
  if (name == "ss") return make_silent_store(SilentStoreVariant::SS);
  if (name == "ssi") return make_silent_store(SilentStoreVariant::SSI);
  if (name == "ssi0") return make_silent_store(SilentStoreVariant::SSI0);
  if (name == "rfc") return make_register_compression(RegisterCompressionVariant::RFC, params);
  if (name == "rfc0") return make_register_compression(RegisterCompressionVariant::RFC0, params);
  if (name == "nrfc") return make_register_compression(RegisterCompressionVariant::NRFC, params);
  if (name == "cs") return make_simplification(SimplificationVariant::CS, params);
  if (name == "cst") return make_simplification(SimplificationVariant::CST, params);
  if (name == "csn") return make_simplification(SimplificationVariant::CSN, params);
  if (name == "op") return make_operand_packing(params);
  if (name == "cr") return make_computation_reuse(false, params);
  if (name == "cra") return make_computation_reuse(true, params);
  if (name == "cc-fpc") return make_cache_compression(CompressionScheme::FPC);
  if (name == "cc-bdi") return make_cache_compression(CompressionScheme::BDI);
  if (name == "pf-nl") return make_nextline_prefetch(params);
  if (name == "pf-s") return make_stream_prefetch(params);
  if (name == "pf-dd") return make_datadep_prefetch(params);
  throw UnknownModel("unknown leakage model '" + std::string(name) + "'");
}

}  // namespace leakcheck
