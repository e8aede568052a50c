#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "seqfluct/core.hpp"
#include "seqfluct/genmodels.hpp"
#include "seqfluct/transforms.hpp"

namespace seqfluct {

/// Point estimate with a 95% normal half-width.
struct EstimateReport {
  std::string name;
  double point = 0.0;
  double half_width = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  std::string params_fingerprint;
};

/// Seed, worker count and the fingerprint stamped on every report.
/// Results never depend on `workers`.
struct RunOptions {
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::string fingerprint;
};

inline constexpr std::size_t kJackknifeBatches = 50;
inline constexpr double kZ95 = 1.959963984540054;

/// One-pass mean/variance accumulator (Welford), mergeable.
struct Welford {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) noexcept {
    ++count;
    const double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
  }
  void merge(const Welford& o) noexcept;
  /// Unbiased sample variance; 0 below two points.
  double variance() const noexcept { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
};

/// Sample variance of xs with a delete-one-batch jackknife half-width
/// (batches are contiguous index ranges).
std::pair<double, double> jackknife_variance(const std::vector<double>& xs,
                                             std::size_t batches = kJackknifeBatches);

struct MomentsReport {
  std::size_t n = 0;
  EstimateReport mean;
  EstimateReport variance;
  EstimateReport gamma;  // mean / n
};

MomentsReport mc_moments(const Model& model, std::size_t n, const ScoringScheme& scheme,
                         std::size_t samples, const RunOptions& opts);

struct ScanRow {
  std::size_t n = 0;
  EstimateReport mean;
  EstimateReport variance;
  double ratio = 0.0;     // Var / n
  double ratio_hw = 0.0;  // half-width of Var / n
};

struct VarianceScan {
  std::vector<ScanRow> rows;
  double slope = 0.0;  // least squares of Var on n
  double intercept = 0.0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double spread = 0.0;  // max_ratio / min_ratio
};

/// n_list strictly increasing. Each n gets its own substream of the seed.
VarianceScan variance_scan(const Model& model, const ScoringScheme& scheme,
                           const std::vector<std::size_t>& n_list, std::size_t samples,
                           const RunOptions& opts);

/// Seed used for the k-th entry of a scan.
std::uint64_t scan_seed(std::uint64_t seed, std::size_t n);

/// The model's own transformation: letter swap a -> b or the block move.
Transform default_transform(const Model& model);

struct Quantile {
  double level = 0.0;
  double value = 0.0;
};

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

struct A1Report {
  EstimateReport fraction;  // P(E[gain | Z] >= eps0), inapplicable counted as failure
  double eps0 = 0.0;
  bool eps0_auto = false;  // eps0 taken as the 1st percentile of gains
  std::size_t applicable = 0;
  std::size_t inapplicable = 0;
  double mean_gain = 0.0;
  std::vector<Quantile> quantiles;
  std::vector<HistogramBin> histogram;
};

/// eps0 unset -> 1st percentile of the observed gains. A set eps0 must be > 0.
A1Report verify_a1(const Model& model, std::size_t n, const Transform& t, const ScoringScheme& scheme,
                   std::optional<double> eps0, std::size_t samples, const RunOptions& opts);

struct A2Report {
  double min_gain = 0.0;
  double bound = 0.0;  // -a_max (swap) or -1 (block)
  std::size_t applicable = 0;
  std::size_t inapplicable = 0;
  std::uint64_t outcomes = 0;  // transformed pairs scored
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  std::string params_fingerprint;
};

double a2_bound(const Transform& t, const ScoringScheme& scheme);

/// Minimum single-move gain over samples and all their outcomes.
/// Throws Error(invariant) when it falls below the bound.
A2Report verify_a2(const Model& model, std::size_t n, const Transform& t, const ScoringScheme& scheme,
                   std::size_t samples, const RunOptions& opts);

inline constexpr std::size_t kBinHitThreshold = 30;

struct ProfileBin {
  UVStats uv;
  Welford score;  // L within the bin
  Welford gain;   // exact E[L(Z~) - L(Z) | Z] within the bin
};

struct ProfileGap {
  UVStats lower;  // (u, v); the gap is l(u + k0, v) - l(u, v)
  double estimate = 0.0;
  double half_width = 0.0;
};

struct GapSummary {
  std::size_t pairs = 0;
  std::size_t positive = 0;
  double fraction_positive = 0.0;
  double delta_hat = 0.0;  // minimum gap estimate
};

struct ProfileOptions {
  /// Also estimate each gap as the bin mean of the exact conditional gain.
  bool coupled = true;
  std::size_t threshold = kBinHitThreshold;
};

/// Bins over the typical set with two gap estimators. `binned` differences
/// bin means of L. `coupled` uses that the move pushes P_(u,v) onto
/// P_(u+k0,v), so l(u+k0,v) - l(u,v) is the bin mean of the exact
/// conditional gain of z.
struct ConditionalProfile {
  std::size_t n = 0;
  double c = 0.0;
  int span = 1;
  std::size_t threshold = kBinHitThreshold;
  std::uint64_t samples = 0;
  std::uint64_t typical_samples = 0;
  std::uint64_t seed = 0;
  std::string params_fingerprint;
  std::vector<ProfileBin> bins;
  std::vector<ProfileGap> binned_gaps;
  std::vector<ProfileGap> coupled_gaps;
  GapSummary binned;
  GapSummary coupled;
  std::size_t sparse_bins = 0;  // typical bins below the threshold
};

ConditionalProfile conditional_profile(const Model& model, std::size_t n, const ScoringScheme& scheme,
                                       std::size_t samples, double c, const RunOptions& opts,
                                       const ProfileOptions& popts = {});

/// Draws (U, V) with the model's exact joint law without building strings.
UVStats sample_uv(const Model& model, std::size_t n, RandomStream& rng);

struct CondVarRow {
  std::array<std::int64_t, 2> v{0, 0};
  std::size_t count = 0;
  double variance = 0.0;  // Monte Carlo Var[U | V = v, U in window]
  double exact = 0.0;     // closed-form pmf restricted to the window
};

struct CondVarReport {
  std::size_t n = 0;
  double c = 0.0;
  std::vector<CondVarRow> rows;
  double min_ratio = 0.0;        // min Var / n over rows with >= threshold hits
  double exact_min_ratio = 0.0;  // min exact Var / n over the whole V window
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  std::string params_fingerprint;
};

CondVarReport conditional_variance(const Model& model, std::size_t n, double c, std::size_t samples,
                                   const RunOptions& opts);

/// Exact Var[U | V = v, U in the typical window]; 0 for an empty or one-point window.
double exact_window_variance(const Model& model, std::size_t n, double c, std::array<std::int64_t, 2> v);

struct CoverageReport {
  EstimateReport coverage;
  double c = 0.0;
  double exact = 0.0;  // exact P(U, V typical)
  // I.i.d. only: Chebyshev floors 1 - p(1-p)/c^2 and 1 - p_b(1-p_b)/c^2 against exact tails.
  double v_floor = 0.0;
  double v_exact = 0.0;
  double u_floor = 0.0;
  double u_exact_min = 0.0;
};

CoverageReport coverage_check(const Model& model, std::size_t n, double c, std::size_t samples,
                              const RunOptions& opts);

/// Exact probability of the typical set.
double exact_coverage(const Model& model, std::size_t n, double c);

/// Smallest c putting a `target` share of pilot draws inside the typical set.
double pilot_c(const Model& model, std::size_t n, double target, std::size_t samples, std::uint64_t seed);

inline constexpr double kPilotTarget = 0.91;
inline constexpr std::size_t kPilotSamples = 20000;

struct FloorReport {
  std::size_t n = 0;
  double c = 0.0;
  double min_pmf = 0.0;
  double scaled = 0.0;  // n * min_pmf
  UVStats argmin;
  std::size_t points = 0;
};

/// Exact minimum of P(U = u, V = v) over the typical window.
FloorReport pointmass_floor(const Model& model, std::size_t n, double c);

double chebyshev_bound(double zeta);
double hoeffding_bound(double delta, double a, std::size_t n);

struct TailCheck {
  double bound = 0.0;
  EstimateReport empirical;
};

/// Empirical P(|S_m/m - mu| >= delta) for sums of m block lengths against
/// 2 exp(-delta^2 m / (2 a^2)), a = max |W - mu|.
TailCheck block_sum_hoeffding(const BlockModelParams& params, std::size_t m, double delta,
                              std::size_t trials, const RunOptions& opts);
/// Empirical P(|S_m - m mu| >= zeta sd) against 1/zeta^2.
TailCheck block_sum_chebyshev(const BlockModelParams& params, std::size_t m, double zeta,
                              std::size_t trials, const RunOptions& opts);

}  // namespace seqfluct
