#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "seqfluct/core.hpp"
#include "seqfluct/random.hpp"

namespace seqfluct {

/// Parameters of the 3-multinomial block model: block lengths l-1, l, l+1
/// drawn with probabilities q1, q2, q3.
class BlockModelParams {
 public:
  BlockModelParams(int l, double q1, double q2, double q3);

  int l() const noexcept { return l_; }
  double q1() const noexcept { return q_[0]; }
  double q2() const noexcept { return q_[1]; }
  double q3() const noexcept { return q_[2]; }
  /// q for block length l - 1 + i, i in {0, 1, 2}.
  double q(int i) const noexcept { return q_[i]; }
  /// Mean block length l + q3 - q1.
  double mu() const noexcept { return l_ + q_[2] - q_[0]; }
  /// P(W >= r) for the trailing run length r in 1..l+1.
  double tail(std::int64_t r) const;

  friend bool operator==(const BlockModelParams&, const BlockModelParams&) = default;

 private:
  int l_;
  std::array<double, 3> q_;
};

/// Block counts of a block-model outcome and the trailing run length.
struct BlockStats {
  std::int64_t b1 = 0;  // blocks of length l-1
  std::int64_t b2 = 0;  // blocks of length l
  std::int64_t b3 = 0;  // blocks of length l+1
  std::int64_t r = 0;   // trailing run (not a block)

  friend bool operator==(const BlockStats&, const BlockStats&) = default;
};

/// The driving statistics (U, V). For the block model v = (t, r); for the
/// i.i.d. model v = (N_a + N_b, 0) and u = N_b.
struct UVStats {
  std::int64_t u = 0;
  std::array<std::int64_t, 2> v{0, 0};

  static UVStats iid(std::int64_t u, std::int64_t v) { return {u, {v, 0}}; }
  static UVStats block(std::int64_t t, std::int64_t u, std::int64_t r) { return {u, {t, r}}; }

  std::int64_t t() const noexcept { return v[0]; }
  std::int64_t r() const noexcept { return v[1]; }

  friend bool operator==(const UVStats&, const UVStats&) = default;
  friend std::strong_ordering operator<=>(const UVStats& a, const UVStats& b) noexcept {
    if (auto c = a.v <=> b.v; c != 0) return c;
    return a.u <=> b.u;
  }
};

/// I.i.d. letters; U counts b's and V counts a's plus b's over both strings.
struct IidModel {
  AlphabetPtr alphabet;
  SymbolDist dist;
  Symbol a = 0;
  Symbol b = 1;

  IidModel(AlphabetPtr alphabet, SymbolDist dist, Symbol a, Symbol b);
};

/// Binary block model; (U, V) = (U, (T, R)) are statistics of X only.
struct BlockModel {
  BlockModelParams params;
};

using Model = std::variant<IidModel, BlockModel>;

/// Run lengths of a sequence, in order.
std::vector<std::int64_t> run_lengths(std::span<const Symbol> x);

Sequence sample_iid(std::size_t n, const AlphabetPtr& alphabet, const SymbolDist& dist,
                    RandomStream& rng);
Sequence sample_block(std::size_t n, const BlockModelParams& params, RandomStream& rng);

/// Deterministic block construction: alternating runs with the given lengths
/// starting with `first`, truncated to n symbols.
Sequence block_sequence(std::span<const std::int64_t> lengths, Symbol first, std::size_t n);

/// Counts interior blocks by length; the last run is the trailing run r.
BlockStats block_stats(const Sequence& x, int l);

/// t = b1+b2+b3, u = b2-b1-b3, r unchanged.
UVStats uv_from_blocks(const BlockStats& stats, std::int64_t n, int l);

/// Inverts the (t, u, r) <-> (b1, b2, b3) linear system. Throws infeasible.
BlockStats tur_to_blocks(std::int64_t t, std::int64_t u, std::int64_t r, std::int64_t n, int l);
std::optional<BlockStats> try_tur_to_blocks(std::int64_t t, std::int64_t u, std::int64_t r,
                                            std::int64_t n, int l);

/// 1/2 q1^b1 q2^b2 q3^b3 p(r).
double block_seq_prob(const Sequence& x, const BlockModelParams& params, std::size_t n);
double log_block_seq_prob(const Sequence& x, const BlockModelParams& params, std::size_t n);

/// Joint pmf of (T, U, R): multinomial(t; b1, b2, b3) q1^b1 q2^b2 q3^b3 p(r).
/// Zero for infeasible triples.
double tur_pmf(std::int64_t t, std::int64_t u, std::int64_t r, const BlockModelParams& params,
               std::size_t n);
/// Natural log of tur_pmf; -inf for infeasible triples.
double log_tur_pmf(std::int64_t t, std::int64_t u, std::int64_t r, const BlockModelParams& params,
                   std::size_t n);

UVStats iid_uv(const SequencePair& z, Symbol a, Symbol b);

/// Shared helpers over the two models.
SequencePair sample_pair(const Model& model, std::size_t n, RandomStream& rng);
UVStats model_uv(const Model& model, const SequencePair& z);
/// Lattice span k0 of the fibers: 1 (i.i.d.) or 4 (block).
int model_span(const Model& model);
std::string describe(const Model& model);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  double width() const noexcept { return hi - lo; }
};

/// Typical windows for (U, V).
///
/// I.i.d.: V in [2np - c sqrt(2n), 2np + c sqrt(2n)], U given v in
/// [v p_b - c sqrt(v), v p_b + c sqrt(v)], p = P(a)+P(b), p_b = P(b)/p.
/// Block: T in [n/mu +- c sqrt(n)], U in [(n/mu)(q2-q1-q3) +- c sqrt(n)], r free.
/// c = 1 gives the classical i.i.d. windows.
class TypicalSets {
 public:
  TypicalSets(const Model& model, std::size_t n, double c);

  /// V window (i.i.d.) or T window (block).
  Interval v_window() const noexcept { return v_window_; }
  /// U window for the given first V component.
  Interval u_window(std::int64_t v0) const;
  bool contains(const UVStats& s) const;

  double c() const noexcept { return c_; }
  bool is_block() const noexcept { return is_block_; }

 private:
  bool is_block_;
  double c_;
  double pb_ = 0.0;
  Interval v_window_;
  Interval u_block_;
  std::int64_t max_r_ = 0;
};

TypicalSets typical_sets(const Model& model, std::size_t n, double c);

}  // namespace seqfluct
