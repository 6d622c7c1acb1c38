#pragma once

#include <cstdint>
#include <limits>

namespace nova {

/// Counter-based SplitMix64 stream.
///
/// The n-th output is a pure function of (key, n), so a stream can be advanced
/// in O(1) and replicate streams are derived by mixing (master seed, replicate)
/// rather than by sequential splitting. Results therefore never depend on the
/// order in which replicates are scheduled.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept : state_(mix(seed)) {}

  /// Independent stream for replicate `replicate` of master seed `seed`.
  static Rng stream(std::uint64_t seed, std::uint64_t replicate) noexcept {
    return Rng(mix(seed) ^ mix(replicate * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ += kGamma;
    return mix(state_);
  }

  void advance(std::uint64_t steps) noexcept { state_ += steps * kGamma; }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Uniform integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept {
    // Lemire's multiply-shift with rejection.
    std::uint64_t x = (*this)();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        x = (*this)();
        m = static_cast<__uint128_t>(x) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t state_;
};

}  // namespace nova
