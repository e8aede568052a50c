#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "seqfluct/core.hpp"

namespace seqfluct {

/// Optimal alignment score L_n = max over alignments of
/// sum_i S(x_rho_i, y_tau_i) + delta * (n - k).
struct AlignmentScore {
  double value = 0.0;
  std::size_t n = 0;
};

/// Three-way DP on the gain S - delta, plus delta * n. Dispatches to the
/// bit-parallel LCS kernel when the scheme is exactly the LCS scheme and to an
/// integer DP when every entry is integral.
AlignmentScore optimal_score(const Sequence& x, const Sequence& y, const ScoringScheme& scheme);
AlignmentScore optimal_score(const SequencePair& z, const ScoringScheme& scheme);

/// Literal maximum over every pair of increasing index sequences. n <= 12.
AlignmentScore brute_force_score(const Sequence& x, const Sequence& y, const ScoringScheme& scheme);

inline constexpr std::size_t kBruteForceMaxLength = 12;

/// Length of the longest common subsequence.
std::int64_t lcs_length(const Sequence& x, const Sequence& y);

/// Plain O(n^2) LCS dynamic program, used as fallback and as a test oracle.
std::int64_t lcs_length_dp(std::span<const Symbol> x, std::span<const Symbol> y);

/// Word-parallel LCS against a fixed pattern.
///
/// Keeps one match mask per symbol over the pattern positions and updates a
/// bit vector V with V' = (V + (V & M)) | (V & ~M) per text symbol; the LCS is
/// the number of zero bits of V. Reuse one kernel to score many texts against
/// the same pattern.
class LcsKernel {
 public:
  LcsKernel(std::span<const Symbol> pattern, std::size_t alphabet_size);
  explicit LcsKernel(const Sequence& pattern);

  std::int64_t length(std::span<const Symbol> text) const;
  std::size_t pattern_size() const noexcept { return m_; }

  /// Incremental interface. A state holds words() 64-bit words.
  std::size_t words() const noexcept { return words_; }
  void init_state(std::span<std::uint64_t> v) const;
  void feed(std::span<std::uint64_t> v, Symbol c) const;
  /// out[k] = LCS(text fed so far, pattern[0..k)) for k = 0..m; out has m+1 slots.
  void prefix_lcs(std::span<const std::uint64_t> v, std::span<std::int32_t> out) const;

 private:
  std::size_t m_;
  std::size_t words_;
  std::size_t sigma_;
  std::vector<std::uint64_t> masks_;
  mutable std::vector<std::uint64_t> v_;
};

/// Reusable scorer for many pairs under one scheme; picks the fastest exact path.
class Scorer {
 public:
  explicit Scorer(ScoringScheme scheme);

  double score(std::span<const Symbol> x, std::span<const Symbol> y) const;
  double score(const SequencePair& z) const { return score(z.x.data(), z.y.data()); }
  const ScoringScheme& scheme() const noexcept { return scheme_; }

 private:
  ScoringScheme scheme_;
  std::vector<std::int64_t> int_gain_;
  std::vector<double> gain_;
  mutable std::vector<std::int64_t> irow_;
  mutable std::vector<double> drow_;
};

}  // namespace seqfluct
