#pragma once

#include <cstdint>
#include <random>

// Deterministic draw helpers. std::uniform_int_distribution and std::shuffle
// are implementation-defined, so anything that must reproduce across standard
// libraries draws through these instead.

namespace polifilter::rng {

/// Unbiased draw in [0, n) from a 64-bit engine via rejection sampling.
inline std::uint64_t bounded(std::mt19937_64& engine, std::uint64_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
  std::uint64_t v = engine();
  while (v > limit) v = engine();
  return v % n;
}

/// Fisher-Yates shuffle driven by bounded().
template <typename Container>
void shuffle(Container& items, std::mt19937_64& engine) {
  using std::swap;
  for (std::size_t i = items.size(); i > 1; --i) {
    swap(items[i - 1], items[static_cast<std::size_t>(bounded(engine, i))]);
  }
}

}  // namespace polifilter::rng
