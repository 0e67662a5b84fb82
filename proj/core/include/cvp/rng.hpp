#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cvp {

using Rng = std::mt19937_64;

/// Derives an independent generator for a named consumer from one root seed.
/// Streams with different names never share draws, so enabling or disabling
/// one consumer does not shift the numbers another one sees.
Rng stream(std::uint64_t root_seed, std::string_view name);

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace cvp
