#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string_view>

namespace rscore {

/// Counter-based splittable generator.
///
/// Output k of a stream with key K is mix(K + k * golden), i.e. SplitMix64
/// viewed as a keyed counter. `split(id)` derives an independent child key so
/// that e.g. replication r of an experiment can be regenerated without
/// replaying the draws of replications 0..r-1.
///
/// All derived draws (uniforms, bounded integers) are computed here rather
/// than through <random> distributions, whose outputs are
/// implementation-defined, so results are identical across standard libraries.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  /// Independent child stream identified by `id`. Does not advance *this.
  Rng split(std::uint64_t id) const noexcept;
  Rng split(std::string_view tag) const noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept;
  /// Uniform integer on [0, bound). `bound` must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }

  template <class T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = below(i);
      std::swap(items[i - 1], items[j]);
    }
  }

  std::uint64_t key() const noexcept { return key_; }

 private:
  Rng(std::uint64_t key, std::uint64_t counter) noexcept : key_(key), counter_(counter) {}

  std::uint64_t key_;
  std::uint64_t counter_;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace rscore
