#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace mbfuse {

/// SplitMix64 finalizer: a bijective 64-bit avalanche mix.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Folds a sequence of integers into one seed: h = mix64(h ^ v) per value,
/// starting from mix64 of the count. Order-sensitive and platform-stable.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) noexcept;

/// Platform-stable random source. The engine is fully specified by the
/// standard; the distributions below are implemented here because the
/// standard library ones differ between implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();
  /// Standard normal deviate (Box-Muller, one value per call).
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// k distinct values from [0, n) in draw order (partial Fisher-Yates).
std::vector<std::uint64_t> sample_without_replacement(Rng& rng, std::uint64_t n, std::uint64_t k);

}  // namespace mbfuse
