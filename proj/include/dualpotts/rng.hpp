#pragma once

#include <cstdint>
#include <random>

namespace dualpotts {

using Rng = std::mt19937_64;

/// Independent purposes that draw from one experiment seed.
enum class StreamTag : std::uint64_t {
  couplings = 0x636f75706c,
  fields = 0x6669656c64,
  sampling = 0x73616d706c,
};

/// Engine for sub-stream (seed, tag, index). Distinct triples give
/// statistically independent streams; equal triples give identical ones.
Rng make_stream(std::uint64_t seed, StreamTag tag, std::uint64_t index = 0);

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [lo, hi], unbiased.
std::uint32_t uniform_int(Rng& rng, std::uint32_t lo, std::uint32_t hi);

}  // namespace dualpotts
