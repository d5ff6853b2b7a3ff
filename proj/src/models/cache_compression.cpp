// Compressed-cache models: the observation is the compressed size of the line
// touched by each memory access.

#include <array>

#include "clauses.hpp"
#include "leakcheck/compression.hpp"

namespace leakcheck {

std::optional<Observation> cc_observe(CompressionScheme scheme, const MicroOp& uop, const Memory& mem) {
  uint64_t addr = 0;
  const StoreUop* st = uop.as<StoreUop>();
  if (st) {
    addr = st->address;
  } else if (const auto* ld = uop.as<LoadUop>()) {
    addr = ld->address;
  } else {
    return std::nullopt;
  }
  const uint64_t base = addr & ~uint64_t{kCacheLineSize - 1};
  std::array<uint8_t, kCacheLineSize> line{};
  mem.read_bytes(base, line);
  if (st) {
    // Bytes past the end of the line belong to the next line and are ignored.
    for (unsigned i = 0; i < st->size; ++i) {
      uint64_t offset = addr - base + i;
      if (offset < kCacheLineSize) line[offset] = static_cast<uint8_t>(st->value >> (8 * i));
    }
  }
  uint64_t size = scheme == CompressionScheme::FPC ? fpc_size(line) : bdi_size(line);
  return Observation{"cc", {size}};
}

namespace models {

namespace {

class CacheCompression : public ClauseBase<CacheCompression> {
 public:
  explicit CacheCompression(CompressionScheme s) : scheme_(s) {}

  std::string_view name() const override { return scheme_ == CompressionScheme::FPC ? "cc-fpc" : "cc-bdi"; }

  std::optional<Observation> observe(const MicroOp& uop, const MachineState& state) override {
    return cc_observe(scheme_, uop, state.mem);
  }

 private:
  CompressionScheme scheme_;
};

}  // namespace

std::unique_ptr<LeakageClause> make_cache_compression(CompressionScheme scheme) {
  return std::make_unique<CacheCompression>(scheme);
}

}  // namespace models
}  // namespace leakcheck
