#pragma once

#include <cstdint>
#include <span>

namespace leakcheck {

inline constexpr size_t kCacheLineSize = 64;

/// Frequent-pattern compressed size of a 64-byte line, in bits.
///
/// Each 32-bit little-endian word costs a 3-bit prefix plus data bits:
///   zero run (1..8 consecutive zero words)   3
///   4-bit sign-extended                      4
///   8-bit sign-extended                      8
///   16-bit sign-extended                    16
///   low halfword zero, high halfword data   16
///   two halfwords, each a sign-extended byte 16
///   one byte repeated four times             8
///   uncompressed                            32
/// A word takes the cheapest pattern that reproduces it. Result is in [12, 560].
/// Throws std::invalid_argument unless line.size() == 64.
unsigned fpc_size(std::span<const uint8_t> line);

/// Base-delta-immediate compressed size of a 64-byte line, in bytes.
///
/// Minimum over: all zero 1; one repeated 8-byte value 8; base8+delta1 16;
/// base8+delta2 24; base8+delta4 40; base4+delta1 20; base4+delta2 36;
/// base2+delta1 34; uncompressed 64. The base is the first segment; an
/// encoding applies when every segment's wrapping difference from the base,
/// read as a signed segment-width integer, fits the signed delta width.
/// Throws std::invalid_argument unless line.size() == 64.
unsigned bdi_size(std::span<const uint8_t> line);

}  // namespace leakcheck
