#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace toolbench::util {

/// Seeded generator whose draws are identical on every platform.
/// std::*_distribution is implementation-defined, so bounded draws use
/// rejection sampling over the raw mt19937_64 stream instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace toolbench::util
