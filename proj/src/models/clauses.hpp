#pragma once

#include <memory>

#include "leakcheck/models.hpp"

namespace leakcheck::models {

enum class SilentStoreVariant { SS, SSI, SSI0 };

std::unique_ptr<LeakageClause> make_ct();
std::unique_ptr<LeakageClause> make_silent_store(SilentStoreVariant variant);
std::unique_ptr<LeakageClause> make_register_compression(RegisterCompressionVariant variant, const ModelParams& params);
std::unique_ptr<LeakageClause> make_simplification(SimplificationVariant variant, const ModelParams& params);
std::unique_ptr<LeakageClause> make_operand_packing(const ModelParams& params);
std::unique_ptr<LeakageClause> make_computation_reuse(bool with_addresses, const ModelParams& params);
std::unique_ptr<LeakageClause> make_cache_compression(CompressionScheme scheme);
std::unique_ptr<LeakageClause> make_nextline_prefetch(const ModelParams& params);
std::unique_ptr<LeakageClause> make_stream_prefetch(const ModelParams& params);
std::unique_ptr<LeakageClause> make_datadep_prefetch(const ModelParams& params);

}  // namespace leakcheck::models
