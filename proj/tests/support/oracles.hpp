#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace leakcheck::support {

/// Minimal frequent-pattern encoding found by dynamic programming over every
/// way of covering the line's words with zero runs and single-word patterns.
/// A pattern applies when decoding its payload reproduces the word.
unsigned fpc_size_oracle(std::span<const uint8_t> line);

/// Minimal base-delta encoding by exhaustive check of every scheme using
/// 128-bit signed arithmetic.
unsigned bdi_size_oracle(std::span<const uint8_t> line);

/// 64-byte lines mixing zero words, small deltas, repeated bytes, narrow and
/// random values, so that every encoding is exercised.
std::vector<uint8_t> random_structured_line(std::mt19937_64& rng);

}  // namespace leakcheck::support
