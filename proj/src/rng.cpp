#include "dualpotts/rng.hpp"

#include <limits>

namespace dualpotts {

namespace {
std::uint32_t lo32(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
std::uint32_t hi32(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }
}  // namespace

Rng make_stream(std::uint64_t seed, StreamTag tag, std::uint64_t index) {
  const auto t = static_cast<std::uint64_t>(tag);
  std::seed_seq seq{lo32(seed), hi32(seed), lo32(t), hi32(t), lo32(index), hi32(index)};
  return Rng(seq);
}

std::uint32_t uniform_int(Rng& rng, std::uint32_t lo, std::uint32_t hi) {
  // Rejection on the top of the 64-bit range keeps every value equally likely.
  const std::uint64_t span = static_cast<std::uint64_t>(hi) - lo + 1;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t r = rng();
  while (r >= limit) r = rng();
  return lo + static_cast<std::uint32_t>(r % span);
}

}  // namespace dualpotts
