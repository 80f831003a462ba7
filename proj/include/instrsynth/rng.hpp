#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace instrsynth {

/// Seeded generator with platform-independent draws.
///
/// The standard distributions are implementation-defined, so identical seeds
/// could produce different pages on different standard libraries. All draws
/// here are derived from the raw mt19937_64 stream, which the standard pins
/// bit-for-bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi].
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t index(std::size_t n);

  /// Uniform integer in [lo, hi].
  int between(int lo, int hi) { return lo + static_cast<int>(index(static_cast<std::size_t>(hi - lo + 1))); }

  template <typename T>
  const T& pick(std::span<const T> items) {
    return items[index(items.size())];
  }

  /// Fisher-Yates shuffle driven by index().
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[index(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Counter-based per-item seed: stream i depends only on (master, i), so a
/// run of N items is a prefix of a run of M > N items under the same master.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// 64-bit FNV-1a, used for content hashes recorded in manifests.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace instrsynth
