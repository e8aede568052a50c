#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "seqfluct/align.hpp"
#include "seqfluct/core.hpp"
#include "seqfluct/random.hpp"

namespace seqfluct {

/// Turn one uniformly chosen occurrence of `a` (over both strings) into `b`.
struct LetterSwap {
  Symbol a = 0;
  Symbol b = 1;
};

/// In x only: one uniform (l-1)-block and one independent uniform
/// (l+1)-block both become l-blocks. y is left untouched.
struct BlockTransform {
  int l = 2;
};

using Transform = std::variant<LetterSwap, BlockTransform>;

Transform make_letter_swap(Symbol a, Symbol b);
Transform make_block_transform(int l);

/// Shift k0 of the driving statistic U under the transformation.
int transform_shift(const Transform& t) noexcept;

struct Outcome {
  SequencePair z;
  double prob = 0.0;
};

/// Exact law of the transformed pair; identical pairs are merged.
struct OutcomeSet {
  std::vector<Outcome> items;
  /// Number of equally likely raw choices before merging.
  std::size_t raw_choices = 0;
};

/// Throws Error(inapplicable) when z has no `a` (swap) or b1 * b3 == 0 (block).
SequencePair apply(const SequencePair& z, const Transform& t, RandomStream& rng);
OutcomeSet outcomes(const SequencePair& z, const Transform& t);
std::vector<SequencePair> preimages(const SequencePair& z_tilde, const Transform& t);

/// Exact conditional gain statistics over every outcome of z.
struct GainProfile {
  double base_score = 0.0;     // L(z)
  double expected_gain = 0.0;  // E[L(z~) - L(z) | z]
  double min_gain = 0.0;
  double max_gain = 0.0;
  /// Equally likely raw choices (before merging identical outcomes).
  std::size_t outcomes = 0;
};

/// Fast exact path: prefix/suffix splits instead of rescoring every outcome.
/// Letter swaps use full forward/backward DP tables; block moves on the LCS
/// scheme use checkpointed bit-parallel states. Falls back to enumeration.
GainProfile gain_profile(const SequencePair& z, const Transform& t, const Scorer& scorer);
/// Rescores every outcome from scratch. Slow; kept as the reference path.
GainProfile gain_profile_enumerated(const SequencePair& z, const Transform& t, const Scorer& scorer);
double expected_gain(const SequencePair& z, const Transform& t, const ScoringScheme& scheme);

/// Whether apply() would succeed on z.
bool is_applicable(const SequencePair& z, const Transform& t);

}  // namespace seqfluct
