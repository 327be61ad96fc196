#pragma once

// Seeded randomness with platform-stable output.
//
// Two flavours are used across the library:
//  * a counter-based hash (splitmix64 finalizer chained over the key words),
//    so a value depends only on (seed, stream, counter) and never on the
//    order in which threads happen to ask for it;
//  * std::mt19937_64 for sequential draws (init, shuffles). Its output
//    sequence is fixed by the standard; the distributions in <random> are
//    not, so bounded and real draws are derived here by hand.

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace bpsnn::rng {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash(std::uint64_t seed, std::uint64_t stream,
                             std::uint64_t counter) noexcept {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ stream);
  return splitmix64(h ^ counter);
}

// Top 53 bits mapped onto [0, 1).
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

constexpr double uniform(std::uint64_t seed, std::uint64_t stream,
                         std::uint64_t counter) noexcept {
  return to_unit(hash(seed, stream, counter));
}

using Engine = std::mt19937_64;

inline double uniform(Engine& engine) { return to_unit(engine()); }

// Unbiased draw in [0, n) by rejection.
inline std::uint64_t below(Engine& engine, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = engine();
    if (r >= threshold) return r % n;
  }
}

// Fisher-Yates, high index down.
template <class T>
void shuffle(std::span<T> items, Engine& engine) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(below(engine, i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace bpsnn::rng
