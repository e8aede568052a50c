#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "seqfluct/align.hpp"
#include "seqfluct/core.hpp"
#include "seqfluct/genmodels.hpp"
#include "seqfluct/transforms.hpp"

namespace seqfluct {

/// Finite law: distinct support points with matching probabilities.
template <typename T>
struct DiscreteLaw {
  std::vector<T> support;
  std::vector<double> probs;

  std::size_t size() const noexcept { return support.size(); }
  double total() const noexcept {
    double s = 0.0;
    for (double p : probs) s += p;
    return s;
  }
};

using PairLaw = DiscreteLaw<SequencePair>;
using IntLaw = DiscreteLaw<std::int64_t>;

/// Builds a law from weighted points, merging duplicates and normalizing.
template <typename T>
DiscreteLaw<T> make_law(const std::map<T, double>& weights) {
  DiscreteLaw<T> law;
  double total = 0.0;
  for (const auto& [point, w] : weights) total += w;
  for (const auto& [point, w] : weights) {
    if (w <= 0.0) continue;
    law.support.push_back(point);
    law.probs.push_back(w / total);
  }
  return law;
}

/// 1/2 sum |p - q| with supports matched by value.
template <typename T>
double tv_distance(const DiscreteLaw<T>& p, const DiscreteLaw<T>& q) {
  std::map<T, double> diff;
  for (std::size_t i = 0; i < p.size(); ++i) diff[p.support[i]] += p.probs[i];
  for (std::size_t i = 0; i < q.size(); ++i) diff[q.support[i]] -= q.probs[i];
  double s = 0.0;
  for (const auto& [point, d] : diff) s += d < 0 ? -d : d;
  return 0.5 * s;
}

double law_mean(const IntLaw& law);
double law_variance(const IntLaw& law);

/// Guard on exhaustive enumeration: number of pairs.
inline constexpr double kEnumerationLimit = 1e7;

/// All block-model strings of length n with their probabilities.
std::vector<std::pair<Sequence, double>> enumerate_block_strings(const BlockModelParams& params,
                                                                std::size_t n);

/// Number of pairs enumerate_model would produce; infinity-safe double.
double enumeration_size(const Model& model, std::size_t n);

/// Streams every pair of the sample space with its exact probability.
/// Throws Error(guard) past kEnumerationLimit pairs.
void for_each_outcome(const Model& model, std::size_t n,
                      const std::function<void(const SequencePair&, double)>& visit);

PairLaw enumerate_model(const Model& model, std::size_t n);

/// Restriction of the model to {U = u, V = v}, renormalized.
PairLaw conditional_law(const Model& model, std::size_t n, const UVStats& uv);

/// Same fiber, probabilities from the closed forms: prod q_j^{m_j} over the
/// multinomial coefficient (i.i.d.) or one half over the block multinomial
/// times the law of y (block). Not renormalized.
PairLaw conditional_law_closed_form(const Model& model, std::size_t n, const UVStats& uv);

/// Law of the transformed pair when Z ~ conditional_law(uv). Throws
/// Error(inapplicable) if some point of the fiber admits no move.
PairLaw pushforward(const Model& model, std::size_t n, const UVStats& uv, const Transform& t);

/// Law of the transformed pair when Z ~ law.
PairLaw pushforward_law(const PairLaw& law, const Transform& t);

/// All conditional laws of the model in one enumeration pass.
std::map<UVStats, PairLaw> conditional_laws(const Model& model, std::size_t n);

/// Every (u, v) with positive probability, in UVStats order.
std::vector<UVStats> support_points(const Model& model, std::size_t n);

/// Fiber S_n(v): all u with P(U = u, V = v) > 0, sorted. v = (v0, 0) for
/// i.i.d., (t, r) for block.
std::vector<std::int64_t> fiber(const Model& model, std::size_t n, std::array<std::int64_t, 2> v);

/// Exact moments of L with the split Var L = E Var[L|U,V] + Var E[L|U,V].
struct ExactMoments {
  double mean = 0.0;
  double variance = 0.0;
  double within = 0.0;   // E Var[L | U, V]
  double between = 0.0;  // Var E[L | U, V]
};

ExactMoments exact_moments(const Model& model, std::size_t n, const ScoringScheme& scheme);

struct ConditionalMean {
  double prob = 0.0;  // P(U = u, V = v)
  double mean = 0.0;  // l(u, v)
};

/// l(u, v) = E[L | U = u, V = v] for every support point.
std::map<UVStats, ConditionalMean> exact_conditional_means(const Model& model, std::size_t n,
                                                          const ScoringScheme& scheme);

/// Closed-form P(U = u, V = v): binomial product (i.i.d.) or tur_pmf (block).
double uv_pmf(const Model& model, std::size_t n, const UVStats& uv);
double log_uv_pmf(const Model& model, std::size_t n, const UVStats& uv);

/// Fitted K of the ratio window 1 - K/sqrt(n) <= pmf(u+4, v)/pmf(u, v) <= 1 + K/sqrt(n)
/// over typical fibers of the block model.
double quotient_window_k(const BlockModelParams& params, std::size_t n, double c);

/// min over |i - mp| <= beta sqrt(m) of sqrt(m) * Binomial(m, p)(i).
double binomial_lclt_floor(std::int64_t m, double p, double beta);
/// Trinomial analogue over the box |b_i - m q_i| <= beta sqrt(m), i = 1, 2: m * pmf.
double trinomial_lclt_floor(std::int64_t m, const std::array<double, 3>& q, double beta);
/// Var[X | X in I_m] / m for X ~ Binomial(m, p), I_m = mp +- beta sqrt(m).
double binomial_window_variance(std::int64_t m, double p, double beta);

double log_binomial_pmf(std::int64_t m, std::int64_t k, double p);

inline constexpr double kOracleTolerance = 1e-10;

/// Outcome of one exhaustive check. `metric` is a TV distance (tilde2,
/// tilde, pmf), an absolute residual (deco) or a mismatch count (fiber).
struct OracleCheckResult {
  std::string check;
  bool pass = false;
  double metric = 0.0;
  std::string metric_name;
  std::size_t cases = 0;
};

/// check in {tilde2, tilde, pmf, deco, fiber}.
OracleCheckResult oracle_check(const std::string& check, const Model& model, std::size_t n,
                               const ScoringScheme& scheme);

}  // namespace seqfluct
