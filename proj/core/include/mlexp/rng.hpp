#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

namespace mlexp {

/// One step of splitmix64; advances `state`.
std::uint64_t splitmix64(std::uint64_t& state);

/// xoshiro256** (Blackman & Vigna, 2018), state filled from splitmix64(seed).
///
/// Every derived draw (bounded integers, unit doubles, shuffles) is defined
/// here rather than through <random> distributions, whose output differs
/// between standard library implementations. Seeded results are therefore
/// identical on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();

  /// Uniform integer in [0, bound) by rejection on the top bits (Lemire's
  /// multiply-shift with exact rejection). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  /// Uniform double in [0, 1) built from the top 53 bits.
  double uniform();

  /// Fisher-Yates, walking from the last element down.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace mlexp
