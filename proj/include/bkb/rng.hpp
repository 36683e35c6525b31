#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>

namespace bkb {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Named streams derived from an experiment seed.
enum class Stream : std::uint64_t {
  FirstArm = 1,
  Noise = 2,
  Dictionary = 3,
  Function = 4,
  Arms = 5,
  Passive = 6,
};

/// Counter-based generator. Draw n of a stream with key k is mix64(k + n * golden),
/// so every stream is reproducible from (seed, stream, index) alone and does not
/// depend on the platform's <random> distributions.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static CounterRng stream(std::uint64_t seed, Stream tag, std::uint64_t index = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    return mix64(key_ + (counter_++) * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; consumes two draws.
  double normal();

  /// Uniform integer in [0, n).
  std::size_t uniform_index(std::size_t n);

  /// One draw: true iff uniform() < p.
  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace bkb
