#include "leakcheck/compression.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace leakcheck {

namespace {

void require_line(std::span<const uint8_t> line) {
  if (line.size() != kCacheLineSize) {
    throw std::invalid_argument("compression expects a 64-byte line, got " + std::to_string(line.size()) + " bytes");
  }
}

uint64_t load_le(std::span<const uint8_t> bytes, size_t offset, size_t width) {
  uint64_t v = 0;
  for (size_t i = 0; i < width; ++i) v |= uint64_t{bytes[offset + i]} << (8 * i);
  return v;
}

// True when the low `total` bits of v are the sign extension of its low `bits`.
bool sign_extends(uint64_t v, unsigned bits, unsigned total) {
  uint64_t mask = total >= 64 ? ~uint64_t{0} : (uint64_t{1} << total) - 1;
  uint64_t upper = (v >> (bits - 1)) & (mask >> (bits - 1));
  uint64_t ones = mask >> (bits - 1);
  return upper == 0 || upper == ones;
}

constexpr unsigned kPrefixBits = 3;

unsigned fpc_word_bits(uint32_t w) {
  unsigned best = 32;
  if (sign_extends(w, 4, 32)) best = std::min(best, 4u);
  if (sign_extends(w, 8, 32)) best = std::min(best, 8u);
  if (sign_extends(w, 16, 32)) best = std::min(best, 16u);
  if ((w & 0xFFFF) == 0) best = std::min(best, 16u);
  if (sign_extends(w & 0xFFFF, 8, 16) && sign_extends(w >> 16, 8, 16)) best = std::min(best, 16u);
  uint32_t b = w & 0xFF;
  if (w == b * 0x01010101u) best = std::min(best, 8u);
  return kPrefixBits + best;
}

}  // namespace

unsigned fpc_size(std::span<const uint8_t> line) {
  require_line(line);
  constexpr unsigned kMaxRun = 8;
  unsigned bits = 0;
  unsigned run = 0;
  for (size_t i = 0; i < kCacheLineSize / 4; ++i) {
    auto w = static_cast<uint32_t>(load_le(line, 4 * i, 4));
    if (w == 0) {
      if (++run == kMaxRun) {
        bits += kPrefixBits + 3;
        run = 0;
      }
      continue;
    }
    if (run != 0) {
      bits += kPrefixBits + 3;
      run = 0;
    }
    bits += fpc_word_bits(w);
  }
  if (run != 0) bits += kPrefixBits + 3;
  return bits;
}

unsigned bdi_size(std::span<const uint8_t> line) {
  require_line(line);
  if (std::all_of(line.begin(), line.end(), [](uint8_t b) { return b == 0; })) return 1;

  auto fits = [&](unsigned base_width, unsigned delta_width) {
    const unsigned seg_bits = 8 * base_width;
    const uint64_t base = load_le(line, 0, base_width);
    for (size_t off = 0; off < kCacheLineSize; off += base_width) {
      uint64_t delta = load_le(line, off, base_width) - base;
      if (!sign_extends(delta, 8 * delta_width, seg_bits)) return false;
    }
    return true;
  };

  unsigned best = 64;
  bool repeated = true;
  const uint64_t first = load_le(line, 0, 8);
  for (size_t off = 8; off < kCacheLineSize; off += 8) repeated = repeated && load_le(line, off, 8) == first;
  if (repeated) best = std::min(best, 8u);

  struct Encoding {
    unsigned base, delta, size;
  };
  constexpr Encoding kEncodings[] = {{8, 1, 16}, {8, 2, 24}, {8, 4, 40}, {4, 1, 20}, {4, 2, 36}, {2, 1, 34}};
  for (const auto& e : kEncodings) {
    if (e.size < best && fits(e.base, e.delta)) best = e.size;
  }
  return best;
}

}  // namespace leakcheck
