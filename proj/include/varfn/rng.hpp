#pragma once

#include <cstdint>
#include <random>

namespace varfn {

using Rng = std::mt19937_64;

/// Per-trial / per-sample seed rule shared by every Monte-Carlo loop, so a
/// parallel run visits exactly the same random streams as a serial one.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
  return base + index;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Generator for one stream. Consecutive seeds are scrambled through SplitMix64
/// before they reach the Mersenne twister.
Rng make_rng(std::uint64_t seed);

}  // namespace varfn
