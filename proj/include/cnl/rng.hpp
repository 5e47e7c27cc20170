#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>

namespace cnl {

/// SplitMix64 generator. Each output is a bijective mix of a Weyl counter, so
/// a stream is fully determined by its starting state.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state = 0) : state_(state) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    state_ += kGolden;
    return mix(state_);
  }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

 private:
  std::uint64_t state_;
};

/// Independent stream for work item `index` under `seed`. Results computed
/// per item do not depend on how items are split between workers.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t s = SplitMix64::mix(seed + SplitMix64::kGolden);
  return SplitMix64(SplitMix64::mix(s ^ SplitMix64::mix(index * 2 + 1)));
}

/// Pairwise (cascade) summation; rounding error grows as O(log n).
inline double pairwise_sum(std::span<const double> xs) {
  constexpr std::size_t kLeaf = 32;
  if (xs.size() <= kLeaf) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

}  // namespace cnl
