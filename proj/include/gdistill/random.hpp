#pragma once

#include <cstdint>
#include <random>

namespace gdistill {

using Rng = std::mt19937_64;

/// Independent generator for sub-stream `stream` of `seed`. Different streams
/// of one seed never share state, so adding a consumer does not shift others.
inline Rng derive_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x6764u};
  return Rng(seq);
}

// Stream ids used across the library.
namespace streams {
inline constexpr std::uint64_t kSbmEdges = 1;
inline constexpr std::uint64_t kSbmFeatures = 2;
inline constexpr std::uint64_t kSplit = 3;
inline constexpr std::uint64_t kNoise = 4;
inline constexpr std::uint64_t kSkipGram = 5;
inline constexpr std::uint64_t kTeacherInit = 6;
inline constexpr std::uint64_t kStudentInit = 7;
inline constexpr std::uint64_t kStudentBatches = 8;
inline constexpr std::uint64_t kWalksBase = 1u << 20;  // + start node
}  // namespace streams

}  // namespace gdistill
