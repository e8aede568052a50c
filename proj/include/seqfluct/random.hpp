#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace seqfluct {

/// Reproducible random stream with deterministic substreams.
///
/// A stream is identified by a 64-bit key. substream(i) derives a child key
/// from (key, i) through std::seed_seq, so sample i of a Monte Carlo run
/// draws from the same numbers no matter which worker evaluates it.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed) : key_(seed), engine_(seed) {}

  RandomStream substream(std::uint64_t index) const {
    std::seed_seq seq{static_cast<std::uint32_t>(key_), static_cast<std::uint32_t>(key_ >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      0x5eedu};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return RandomStream((static_cast<std::uint64_t>(out[1]) << 32) | out[0]);
  }

  std::uint64_t key() const noexcept { return key_; }

  static constexpr result_type min() { return std::numeric_limits<result_type>::min(); }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform double in [0, 1).
  double uniform() { return std::generate_canonical<double, 53>(engine_); }

  bool coin() { return (engine_() >> 63) != 0; }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine_);
  }

 private:
  std::uint64_t key_;
  std::mt19937_64 engine_;
};

}  // namespace seqfluct
