#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace ecml {

// Portable sampling on top of std::mt19937_64. The standard distributions are
// implementation-defined, so everything that must be reproducible across
// toolchains goes through these helpers instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Rejection sampling keeps it unbiased.
  std::size_t index(std::size_t n);

  /// Standard normal via Box-Muller (no cached second draw).
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// Derives an independent sub-seed from a base seed and a component name
/// (FNV-1a over the name, mixed with splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::string_view component);

/// FNV-1a 64-bit hash.
std::uint64_t fnv1a(std::string_view text);

}  // namespace ecml
