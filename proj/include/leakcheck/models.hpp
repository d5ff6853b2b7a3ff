#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "leakcheck/leakage.hpp"

namespace leakcheck {

inline constexpr uint64_t kAll1 = ~uint64_t{0};

// Discriminants used by the address-reuse tables of the cra model, chosen
// outside the opcode range.
inline constexpr uint64_t kReuseAddrTable = 0x100;
inline constexpr uint64_t kReuseLoadTable = 0x101;

struct ModelParams {
  uint64_t narrow_rfc_limit = uint64_t{1} << 16;
  uint64_t narrow_cs_limit = uint64_t{1} << 32;
  uint64_t op_ctx_size = 200;
  uint64_t op_narrow_limit = 16;
  uint64_t cr_ways = 4;  // 0 = unbounded
  std::set<Mnemonic> caching_ops = {Mnemonic::Add, Mnemonic::Sub, Mnemonic::Mul, Mnemonic::And, Mnemonic::Or,
                                    Mnemonic::Xor, Mnemonic::Shl, Mnemonic::Shr, Mnemonic::Sar};
  uint64_t cacheline_bits = 6;
  uint64_t page_bits = 12;
  uint64_t pf_hits = 3;
  uint64_t m1pf_size = 20;
  uint64_t m1pf_prefetch = 5;
  uint64_t word_read_size = 8;

  // Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

class UnknownModel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct LeakageModelInfo {
  std::string_view name;
  std::string_view summary;
  std::vector<std::string_view> params;
};

std::span<const LeakageModelInfo> leakage_models();
const LeakageModelInfo* find_leakage_model(std::string_view name);

/// Sets a model parameter by its registry name (e.g. OP_CTX_SIZE). Throws
/// std::invalid_argument when `model` does not take a parameter of that name.
void set_model_param(ModelParams& params, std::string_view model, std::string_view key, uint64_t value);
uint64_t get_model_param(const ModelParams& params, std::string_view key);

/// Builds a fresh clause. Throws UnknownModel for names not in the registry.
std::unique_ptr<LeakageClause> make_leakage_clause(std::string_view name, const ModelParams& params = {});

// Per-event observation functions, usable without a clause instance.
std::optional<Observation> ct_observe(const MicroOp& uop);
std::optional<Observation> pf_nextline(const MicroOp& uop, const ModelParams& params = {});

enum class SimplificationVariant { CS, CST, CSN };
std::optional<Observation> cs_observe(SimplificationVariant variant, const MicroOp& uop, const ModelParams& params = {});

enum class RegisterCompressionVariant { RFC, RFC0, NRFC };
std::optional<Observation> rfc_observe(RegisterCompressionVariant variant, const MicroOp& uop,
                                       const MachineState& state, const ModelParams& params = {});

// Observation emitted for a load or store under the cc models.
enum class CompressionScheme { FPC, BDI };
std::optional<Observation> cc_observe(CompressionScheme scheme, const MicroOp& uop, const Memory& mem);

}  // namespace leakcheck
