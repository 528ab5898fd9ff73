// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

namespace lrs {

using Engine = std::mt19937_64;

// Named streams for counter-based seed derivation. Values are part of the
// on-disk reproducibility contract; never renumber.
enum class Stream : std::uint64_t {
  kShapeSample = 1,
  kSearchInit = 2,
  kSearchOrder = 3,
  kEvalInit = 4,
  kEvalOrder = 5,
  kNoiseInitA = 6,
  kNoiseOrderA = 7,
  kNoiseInitB = 8,
  kNoiseOrderB = 9,
  kFitRestart = 10,
  kBootstrap = 11,
  kEmpiricalSplit = 12,
  kSimulate = 13,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Derives an independent 64-bit seed for (stream, index) under a master seed.
/// Adding streams or indices never perturbs existing ones.
std::uint64_t derive_seed(std::uint64_t master, Stream stream,
                          std::uint64_t index) noexcept;
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t index) noexcept;

}  // namespace lrs
