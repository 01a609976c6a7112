#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace findrl {

// Seeded generator with platform-independent draws. std::mt19937_64 output is
// fully specified by the standard; the distributions in <random> are not, so
// the helpers below map raw bits to values themselves.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Rejection sampling keeps it unbiased.
  std::size_t below(std::size_t n);

  bool bernoulli(double p) { return uniform() < p; }

  /// Index drawn proportionally to non-negative `weights`.
  std::size_t categorical(std::span<const double> weights);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  /// Independent child generator for a named sub-task.
  Rng fork(std::string_view label);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Stable 64-bit hash of a label (FNV-1a), used for substream derivation.
std::uint64_t label_hash(std::string_view label);

/// Seed of the named substream of `master`. Stages never share a stream:
/// derive_seed(s, "corpus") and derive_seed(s, "dql") are unrelated.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label);
std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index);

}  // namespace findrl
