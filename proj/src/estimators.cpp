#include "seqfluct/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "seqfluct/align.hpp"
#include "seqfluct/error.hpp"
#include "seqfluct/oracle.hpp"

namespace seqfluct {

void Welford::merge(const Welford& o) noexcept {
  if (o.count == 0) return;
  if (count == 0) {
    *this = o;
    return;
  }
  const double total = static_cast<double>(count + o.count);
  const double d = o.mean - mean;
  mean += d * static_cast<double>(o.count) / total;
  m2 += o.m2 + d * d * static_cast<double>(count) * static_cast<double>(o.count) / total;
  count += o.count;
}

namespace {

constexpr std::size_t kChunk = 16;

// Sample i always draws from substream i of the seed, and results land in
// slot i, so every aggregate downstream is independent of scheduling.
template <typename Result, typename MakeState, typename Fn>
std::vector<Result> run_samples(std::size_t count, std::uint64_t seed, unsigned workers,
                                MakeState make_state, Fn fn) {
  std::vector<Result> out(count);
  const RandomStream root(seed);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::size_t error_index = std::numeric_limits<std::size_t>::max();
  auto body = [&] {
    auto state = make_state();
    while (true) {
      const std::size_t begin = next.fetch_add(kChunk);
      if (begin >= count) return;
      const std::size_t end = std::min(count, begin + kChunk);
      for (std::size_t i = begin; i < end; ++i) {
        try {
          RandomStream rng = root.substream(i);
          out[i] = fn(i, rng, state);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (i < error_index) {
            error_index = i;
            error = std::current_exception();
          }
          return;
        }
      }
    }
  };
  const std::size_t useful = (count + kChunk - 1) / kChunk;
  const unsigned threads = static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(workers, useful)));
  if (threads <= 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(body);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

EstimateReport make_report(std::string name, double point, double hw, std::size_t samples,
                           const RunOptions& opts) {
  return {std::move(name), point, hw, samples, opts.seed, opts.fingerprint};
}

EstimateReport proportion_report(std::string name, std::size_t hits, std::size_t total, const RunOptions& opts) {
  const double p = total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
  const double hw = total ? kZ95 * std::sqrt(p * (1.0 - p) / static_cast<double>(total)) : 0.0;
  return make_report(std::move(name), p, hw, total, opts);
}

void require_samples(std::size_t samples, std::size_t minimum) {
  if (samples < minimum) {
    throw Error(ErrorKind::validation, "samples must be at least " + std::to_string(minimum));
  }
}

void require_n(std::size_t n) {
  if (n == 0) throw Error(ErrorKind::validation, "n must be positive");
}

void require_scheme(const Model& model, const ScoringScheme& scheme) {
  const std::size_t k = std::holds_alternative<IidModel>(model) ? std::get<IidModel>(model).alphabet->size() : 2;
  if (scheme.alphabet_size() != k) {
    throw Error(ErrorKind::dimension, "scheme does not match the model alphabet");
  }
}

bool next_in_fiber(const Model& model, std::size_t n, const UVStats& uv) {
  const int k0 = model_span(model);
  if (std::holds_alternative<IidModel>(model)) return uv.u + k0 <= uv.v[0];
  const int l = std::get<BlockModel>(model).params.l();
  return try_tur_to_blocks(uv.t(), uv.u + k0, uv.r(), static_cast<std::int64_t>(n), l).has_value();
}

GapSummary summarize(const std::vector<ProfileGap>& gaps) {
  GapSummary s;
  s.pairs = gaps.size();
  if (gaps.empty()) return s;
  s.delta_hat = std::numeric_limits<double>::infinity();
  for (const auto& g : gaps) {
    if (g.estimate > 0.0) ++s.positive;
    s.delta_hat = std::min(s.delta_hat, g.estimate);
  }
  s.fraction_positive = static_cast<double>(s.positive) / static_cast<double>(s.pairs);
  return s;
}

// Integer windows of the typical set.
std::pair<std::int64_t, std::int64_t> int_window(const Interval& w, std::int64_t lo, std::int64_t hi) {
  return {std::max(lo, static_cast<std::int64_t>(std::ceil(w.lo))),
          std::min(hi, static_cast<std::int64_t>(std::floor(w.hi)))};
}

// Calls visit(uv) for every support point inside the typical set.
template <typename Visit>
void for_each_typical_point(const Model& model, std::size_t n, double c, Visit visit) {
  const TypicalSets sets(model, n, c);
  const std::int64_t nn = static_cast<std::int64_t>(n);
  if (std::holds_alternative<IidModel>(model)) {
    const auto [vlo, vhi] = int_window(sets.v_window(), 0, 2 * nn);
    for (std::int64_t v = vlo; v <= vhi; ++v) {
      if (fiber(model, n, {v, 0}).empty()) continue;
      const auto [ulo, uhi] = int_window(sets.u_window(v), 0, v);
      for (std::int64_t u = ulo; u <= uhi; ++u) visit(UVStats::iid(u, v));
    }
    return;
  }
  const int l = std::get<BlockModel>(model).params.l();
  const auto [tlo, thi] = int_window(sets.v_window(), 0, nn);
  const auto [ulo, uhi] = int_window(sets.u_window(0), -nn, nn);
  for (std::int64_t t = tlo; t <= thi; ++t) {
    for (std::int64_t r = 1; r <= l + 1; ++r) {
      for (std::int64_t u = std::max(ulo, -t); u <= std::min(uhi, t); ++u) {
        if (try_tur_to_blocks(t, u, r, nn, l)) visit(UVStats::block(t, u, r));
      }
    }
  }
}

}  // namespace

std::pair<double, double> jackknife_variance(const std::vector<double>& xs, std::size_t batches) {
  const std::size_t n = xs.size();
  if (n < 2) return {0.0, 0.0};
  const std::size_t b = std::max<std::size_t>(2, std::min(batches, n));
  std::vector<Welford> parts(b);
  for (std::size_t k = 0; k < b; ++k) {
    const std::size_t lo = k * n / b, hi = (k + 1) * n / b;
    for (std::size_t i = lo; i < hi; ++i) parts[k].add(xs[i]);
  }
  Welford all;
  for (const auto& p : parts) all.merge(p);
  std::vector<double> leave_out(b);
  double avg = 0.0;
  for (std::size_t k = 0; k < b; ++k) {
    Welford w;
    for (std::size_t j = 0; j < b; ++j) {
      if (j != k) w.merge(parts[j]);
    }
    leave_out[k] = w.variance();
    avg += leave_out[k];
  }
  avg /= static_cast<double>(b);
  double ss = 0.0;
  for (double v : leave_out) ss += (v - avg) * (v - avg);
  const double se = std::sqrt(static_cast<double>(b - 1) / static_cast<double>(b) * ss);
  return {all.variance(), kZ95 * se};
}

MomentsReport mc_moments(const Model& model, std::size_t n, const ScoringScheme& scheme, std::size_t samples,
                         const RunOptions& opts) {
  require_n(n);
  require_samples(samples, 2);
  require_scheme(model, scheme);
  const auto scores = run_samples<double>(
      samples, opts.seed, opts.workers, [&] { return Scorer(scheme); },
      [&](std::size_t, RandomStream& rng, Scorer& scorer) { return scorer.score(sample_pair(model, n, rng)); });
  Welford w;
  for (double s : scores) w.add(s);
  const double mean_hw = kZ95 * std::sqrt(w.variance() / static_cast<double>(samples));
  const auto [var, var_hw] = jackknife_variance(scores);
  const double nn = static_cast<double>(n);
  MomentsReport out;
  out.n = n;
  out.mean = make_report("mean", w.mean, mean_hw, samples, opts);
  out.variance = make_report("variance", var, var_hw, samples, opts);
  out.gamma = make_report("gamma", w.mean / nn, mean_hw / nn, samples, opts);
  return out;
}

std::uint64_t scan_seed(std::uint64_t seed, std::size_t n) { return RandomStream(seed).substream(n).key(); }

VarianceScan variance_scan(const Model& model, const ScoringScheme& scheme, const std::vector<std::size_t>& n_list,
                           std::size_t samples, const RunOptions& opts) {
  if (n_list.empty()) throw Error(ErrorKind::validation, "n_list must not be empty");
  for (std::size_t i = 1; i < n_list.size(); ++i) {
    if (n_list[i] <= n_list[i - 1]) throw Error(ErrorKind::validation, "n_list must be strictly increasing");
  }
  VarianceScan scan;
  for (std::size_t n : n_list) {
    RunOptions sub = opts;
    sub.seed = scan_seed(opts.seed, n);
    const MomentsReport m = mc_moments(model, n, scheme, samples, sub);
    ScanRow row;
    row.n = n;
    row.mean = m.mean;
    row.variance = m.variance;
    row.ratio = m.variance.point / static_cast<double>(n);
    row.ratio_hw = m.variance.half_width / static_cast<double>(n);
    scan.rows.push_back(row);
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double k = static_cast<double>(scan.rows.size());
  scan.min_ratio = std::numeric_limits<double>::infinity();
  scan.max_ratio = -std::numeric_limits<double>::infinity();
  for (const auto& r : scan.rows) {
    const double x = static_cast<double>(r.n), y = r.variance.point;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    scan.min_ratio = std::min(scan.min_ratio, r.ratio);
    scan.max_ratio = std::max(scan.max_ratio, r.ratio);
  }
  const double denom = k * sxx - sx * sx;
  scan.slope = denom != 0.0 ? (k * sxy - sx * sy) / denom : 0.0;
  scan.intercept = (sy - scan.slope * sx) / k;
  scan.spread = scan.min_ratio > 0.0 ? scan.max_ratio / scan.min_ratio : std::numeric_limits<double>::infinity();
  return scan;
}

Transform default_transform(const Model& model) {
  if (const auto* iid = std::get_if<IidModel>(&model)) return make_letter_swap(iid->a, iid->b);
  return make_block_transform(std::get<BlockModel>(model).params.l());
}

namespace {

struct GainSample {
  bool applicable = false;
  double expected = 0.0;
  double min = 0.0;
  std::size_t outcomes = 0;
};

std::vector<GainSample> sample_gains(const Model& model, std::size_t n, const Transform& t,
                                     const ScoringScheme& scheme, std::size_t samples, const RunOptions& opts) {
  require_n(n);
  require_scheme(model, scheme);
  if (std::holds_alternative<BlockTransform>(t) && !std::holds_alternative<BlockModel>(model)) {
    throw Error(ErrorKind::validation, "the block transformation needs the block model");
  }
  return run_samples<GainSample>(
      samples, opts.seed, opts.workers, [&] { return Scorer(scheme); },
      [&](std::size_t, RandomStream& rng, Scorer& scorer) {
        const SequencePair z = sample_pair(model, n, rng);
        GainSample g;
        if (!is_applicable(z, t)) return g;
        const GainProfile p = gain_profile(z, t, scorer);
        g.applicable = true;
        g.expected = p.expected_gain;
        g.min = p.min_gain;
        g.outcomes = p.outcomes;
        return g;
      });
}

double nearest_rank(const std::vector<double>& sorted, double level) {
  if (sorted.empty()) return 0.0;
  const double rank = std::ceil(level * static_cast<double>(sorted.size()));
  const std::size_t idx = rank < 1.0 ? 0 : static_cast<std::size_t>(rank) - 1;
  return sorted[std::min(idx, sorted.size() - 1)];
}

}  // namespace

A1Report verify_a1(const Model& model, std::size_t n, const Transform& t, const ScoringScheme& scheme,
                   std::optional<double> eps0, std::size_t samples, const RunOptions& opts) {
  require_samples(samples, 1);
  if (eps0 && !(*eps0 > 0.0)) throw Error(ErrorKind::validation, "eps0 must be > 0");
  const auto gains = sample_gains(model, n, t, scheme, samples, opts);
  A1Report out;
  std::vector<double> values;
  for (const auto& g : gains) {
    if (g.applicable) values.push_back(g.expected);
  }
  out.applicable = values.size();
  out.inapplicable = samples - values.size();
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  for (double level : {0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99}) {
    out.quantiles.push_back({level, nearest_rank(sorted, level)});
  }
  double total = 0.0;
  for (double v : values) total += v;
  out.mean_gain = values.empty() ? 0.0 : total / static_cast<double>(values.size());
  out.eps0_auto = !eps0.has_value();
  out.eps0 = eps0 ? *eps0 : nearest_rank(sorted, 0.01);
  std::size_t hits = 0;
  for (double v : values) {
    if (v >= out.eps0) ++hits;
  }
  out.fraction = proportion_report("a1_fraction", hits, samples, opts);
  if (!sorted.empty()) {
    constexpr std::size_t kBins = 20;
    const double lo = sorted.front(), hi = sorted.back();
    const double width = hi > lo ? (hi - lo) / kBins : 1.0;
    const std::size_t bins = hi > lo ? kBins : 1;
    for (std::size_t b = 0; b < bins; ++b) {
      out.histogram.push_back({lo + width * static_cast<double>(b), lo + width * static_cast<double>(b + 1), 0});
    }
    for (double v : sorted) {
      const auto b = std::min(bins - 1, static_cast<std::size_t>((v - lo) / width));
      ++out.histogram[b].count;
    }
  }
  return out;
}

double a2_bound(const Transform& t, const ScoringScheme& scheme) {
  if (std::holds_alternative<LetterSwap>(t)) return -scheme.a_max();
  // One inserted letter can be left unmatched; one deleted letter loses at most one pair.
  return -std::max(0.0, scheme.a_max() - scheme.delta());
}

A2Report verify_a2(const Model& model, std::size_t n, const Transform& t, const ScoringScheme& scheme,
                   std::size_t samples, const RunOptions& opts) {
  require_samples(samples, 1);
  const auto gains = sample_gains(model, n, t, scheme, samples, opts);
  A2Report out;
  out.bound = a2_bound(t, scheme);
  out.samples = samples;
  out.seed = opts.seed;
  out.params_fingerprint = opts.fingerprint;
  out.min_gain = std::numeric_limits<double>::infinity();
  for (const auto& g : gains) {
    if (!g.applicable) {
      ++out.inapplicable;
      continue;
    }
    ++out.applicable;
    out.outcomes += g.outcomes;
    out.min_gain = std::min(out.min_gain, g.min);
  }
  if (out.applicable == 0) out.min_gain = 0.0;
  const double tol = scheme.is_integral() ? 0.0 : 1e-9 * std::max(1.0, scheme.a_max());
  if (out.min_gain < out.bound - tol) {
    throw Error(ErrorKind::invariant, "single-move gain " + std::to_string(out.min_gain) + " below the bound " +
                                          std::to_string(out.bound));
  }
  return out;
}

ConditionalProfile conditional_profile(const Model& model, std::size_t n, const ScoringScheme& scheme,
                                       std::size_t samples, double c, const RunOptions& opts,
                                       const ProfileOptions& popts) {
  require_n(n);
  require_samples(samples, 1);
  require_scheme(model, scheme);
  const TypicalSets sets(model, n, c);
  const Transform t = default_transform(model);
  struct Draw {
    UVStats uv;
    double score = 0.0;
    bool typical = false;
    bool has_gain = false;
    double gain = 0.0;
  };
  const auto draws = run_samples<Draw>(
      samples, opts.seed, opts.workers, [&] { return Scorer(scheme); },
      [&](std::size_t, RandomStream& rng, Scorer& scorer) {
        const SequencePair z = sample_pair(model, n, rng);
        Draw d;
        d.uv = model_uv(model, z);
        d.typical = sets.contains(d.uv);
        if (!d.typical) return d;
        if (popts.coupled && is_applicable(z, t)) {
          const GainProfile g = gain_profile(z, t, scorer);
          d.score = g.base_score;
          d.gain = g.expected_gain;
          d.has_gain = true;
        } else {
          d.score = scorer.score(z);
        }
        return d;
      });

  ConditionalProfile out;
  out.n = n;
  out.c = c;
  out.span = model_span(model);
  out.threshold = popts.threshold;
  out.samples = samples;
  out.seed = opts.seed;
  out.params_fingerprint = opts.fingerprint;
  std::map<UVStats, ProfileBin> bins;
  for (const auto& d : draws) {
    if (!d.typical) continue;
    ++out.typical_samples;
    auto& bin = bins[d.uv];
    bin.uv = d.uv;
    bin.score.add(d.score);
    if (d.has_gain) bin.gain.add(d.gain);
  }
  const std::size_t th = popts.threshold;
  for (const auto& [uv, bin] : bins) {
    out.bins.push_back(bin);
    if (bin.score.count < th) ++out.sparse_bins;
    UVStats up = uv;
    up.u += out.span;
    if (!sets.contains(up) || !next_in_fiber(model, n, uv)) continue;
    if (auto it = bins.find(up); it != bins.end() && bin.score.count >= th && it->second.score.count >= th) {
      const auto& hi = it->second.score;
      const auto& lo = bin.score;
      const double se2 = hi.variance() / static_cast<double>(hi.count) + lo.variance() / static_cast<double>(lo.count);
      out.binned_gaps.push_back({uv, hi.mean - lo.mean, kZ95 * std::sqrt(se2)});
    }
    if (bin.gain.count >= th) {
      const double se2 = bin.gain.variance() / static_cast<double>(bin.gain.count);
      out.coupled_gaps.push_back({uv, bin.gain.mean, kZ95 * std::sqrt(se2)});
    }
  }
  out.binned = summarize(out.binned_gaps);
  out.coupled = summarize(out.coupled_gaps);
  return out;
}

UVStats sample_uv(const Model& model, std::size_t n, RandomStream& rng) {
  if (const auto* iid = std::get_if<IidModel>(&model)) {
    const double p = iid->dist[iid->a] + iid->dist[iid->b];
    const double pb = iid->dist[iid->b] / p;
    const auto v = std::binomial_distribution<std::int64_t>(2 * static_cast<std::int64_t>(n), std::min(1.0, p))(rng);
    const auto u = v > 0 ? std::binomial_distribution<std::int64_t>(v, pb)(rng) : 0;
    return UVStats::iid(u, v);
  }
  const auto& params = std::get<BlockModel>(model).params;
  const std::int64_t nn = static_cast<std::int64_t>(n);
  const std::int64_t l = params.l();
  std::int64_t pos = 0;
  BlockStats s;
  while (true) {
    const double x = rng.uniform();
    const std::int64_t w = x < params.q1() ? l - 1 : (x < params.q1() + params.q2() ? l : l + 1);
    if (pos + w >= nn) {
      s.r = nn - pos;
      break;
    }
    (w == l - 1 ? s.b1 : (w == l ? s.b2 : s.b3)) += 1;
    pos += w;
  }
  return uv_from_blocks(s, nn, params.l());
}

double exact_window_variance(const Model& model, std::size_t n, double c, std::array<std::int64_t, 2> v) {
  const TypicalSets sets(model, n, c);
  double w = 0.0, s1 = 0.0;
  std::vector<std::pair<double, double>> pts;
  const Interval uw = sets.u_window(v[0]);
  const std::vector<std::int64_t> fib = fiber(model, n, v);
  // Reference the log pmf to the window's mode so long windows do not underflow.
  double ref = -std::numeric_limits<double>::infinity();
  std::vector<std::pair<std::int64_t, double>> logs;
  for (std::int64_t u : fib) {
    if (!uw.contains(static_cast<double>(u))) continue;
    UVStats uv;
    uv.u = u;
    uv.v = v;
    const double lp = log_uv_pmf(model, n, uv);
    logs.emplace_back(u, lp);
    ref = std::max(ref, lp);
  }
  if (logs.size() < 2) return 0.0;
  for (const auto& [u, lp] : logs) {
    const double p = std::exp(lp - ref);
    pts.emplace_back(static_cast<double>(u), p);
    w += p;
    s1 += p * static_cast<double>(u);
  }
  const double mean = s1 / w;
  double var = 0.0;
  for (const auto& [u, p] : pts) var += p * (u - mean) * (u - mean);
  return var / w;
}

CondVarReport conditional_variance(const Model& model, std::size_t n, double c, std::size_t samples,
                                   const RunOptions& opts) {
  require_n(n);
  require_samples(samples, 1);
  const TypicalSets sets(model, n, c);
  const auto draws = run_samples<UVStats>(
      samples, opts.seed, opts.workers, [] { return 0; },
      [&](std::size_t, RandomStream& rng, int&) { return sample_uv(model, n, rng); });
  std::map<std::array<std::int64_t, 2>, Welford> per_v;
  for (const auto& uv : draws) {
    if (sets.contains(uv)) per_v[uv.v].add(static_cast<double>(uv.u));
  }
  CondVarReport out;
  out.n = n;
  out.c = c;
  out.samples = samples;
  out.seed = opts.seed;
  out.params_fingerprint = opts.fingerprint;
  const double nn = static_cast<double>(n);
  out.min_ratio = std::numeric_limits<double>::infinity();
  for (const auto& [v, w] : per_v) {
    CondVarRow row;
    row.v = v;
    row.count = w.count;
    row.variance = w.variance();
    row.exact = exact_window_variance(model, n, c, v);
    out.rows.push_back(row);
    if (w.count >= kBinHitThreshold) out.min_ratio = std::min(out.min_ratio, row.variance / nn);
  }
  if (!std::isfinite(out.min_ratio)) out.min_ratio = 0.0;
  // Exact minimum over the whole V window.
  out.exact_min_ratio = std::numeric_limits<double>::infinity();
  const std::int64_t n64 = static_cast<std::int64_t>(n);
  if (std::holds_alternative<IidModel>(model)) {
    const auto [lo, hi] = int_window(sets.v_window(), 0, 2 * n64);
    for (std::int64_t v = lo; v <= hi; ++v) {
      if (fiber(model, n, {v, 0}).empty()) continue;
      out.exact_min_ratio = std::min(out.exact_min_ratio, exact_window_variance(model, n, c, {v, 0}) / nn);
    }
  } else {
    const int l = std::get<BlockModel>(model).params.l();
    const auto [lo, hi] = int_window(sets.v_window(), 0, n64);
    for (std::int64_t t = lo; t <= hi; ++t) {
      for (std::int64_t r = 1; r <= l + 1; ++r) {
        out.exact_min_ratio = std::min(out.exact_min_ratio, exact_window_variance(model, n, c, {t, r}) / nn);
      }
    }
  }
  if (!std::isfinite(out.exact_min_ratio)) out.exact_min_ratio = 0.0;
  return out;
}

double exact_coverage(const Model& model, std::size_t n, double c) {
  double total = 0.0;
  for_each_typical_point(model, n, c, [&](const UVStats& uv) { total += uv_pmf(model, n, uv); });
  return total;
}

CoverageReport coverage_check(const Model& model, std::size_t n, double c, std::size_t samples,
                              const RunOptions& opts) {
  require_n(n);
  require_samples(samples, 1);
  if (!(c > 0.0)) throw Error(ErrorKind::validation, "c must be > 0");
  const TypicalSets sets(model, n, c);
  const auto inside = run_samples<char>(
      samples, opts.seed, opts.workers, [] { return 0; },
      [&](std::size_t, RandomStream& rng, int&) { return static_cast<char>(sets.contains(sample_uv(model, n, rng))); });
  std::size_t hits = 0;
  for (char b : inside) hits += b ? 1 : 0;
  CoverageReport out;
  out.coverage = proportion_report("coverage", hits, samples, opts);
  out.c = c;
  out.exact = exact_coverage(model, n, c);
  if (const auto* iid = std::get_if<IidModel>(&model)) {
    const double p = iid->dist[iid->a] + iid->dist[iid->b];
    const double pb = iid->dist[iid->b] / p;
    out.v_floor = 1.0 - p * (1.0 - p) / (c * c);
    out.u_floor = 1.0 - pb * (1.0 - pb) / (c * c);
    const std::int64_t two_n = 2 * static_cast<std::int64_t>(n);
    const auto [vlo, vhi] = int_window(sets.v_window(), 0, two_n);
    out.u_exact_min = 1.0;
    for (std::int64_t v = vlo; v <= vhi; ++v) {
      out.v_exact += std::exp(log_binomial_pmf(two_n, v, p));
      const auto [ulo, uhi] = int_window(sets.u_window(v), 0, v);
      double pu = 0.0;
      for (std::int64_t u = ulo; u <= uhi; ++u) pu += std::exp(log_binomial_pmf(v, u, pb));
      out.u_exact_min = std::min(out.u_exact_min, pu);
    }
  }
  return out;
}

double pilot_c(const Model& model, std::size_t n, double target, std::size_t samples, std::uint64_t seed) {
  require_n(n);
  require_samples(samples, 1);
  if (!(target > 0.0 && target < 1.0)) throw Error(ErrorKind::validation, "pilot target must lie in (0, 1)");
  const double nn = static_cast<double>(n);
  const auto needed = run_samples<double>(samples, seed, 1, [] { return 0; }, [&](std::size_t, RandomStream& rng, int&) {
    const UVStats uv = sample_uv(model, n, rng);
    if (const auto* iid = std::get_if<IidModel>(&model)) {
      const double p = iid->dist[iid->a] + iid->dist[iid->b];
      const double pb = iid->dist[iid->b] / p;
      const double v = static_cast<double>(uv.v[0]);
      const double cv = std::abs(v - 2.0 * nn * p) / std::sqrt(2.0 * nn);
      const double cu = v > 0 ? std::abs(static_cast<double>(uv.u) - v * pb) / std::sqrt(v) : 0.0;
      return std::max(cv, cu);
    }
    const auto& params = std::get<BlockModel>(model).params;
    const double mu = params.mu();
    const double ct = std::abs(static_cast<double>(uv.t()) - nn / mu) / std::sqrt(nn);
    const double center = nn / mu * (params.q2() - params.q1() - params.q3());
    const double cu = std::abs(static_cast<double>(uv.u) - center) / std::sqrt(nn);
    return std::max(ct, cu);
  });
  std::vector<double> sorted = needed;
  std::sort(sorted.begin(), sorted.end());
  // Nudge up so the boundary draw survives recomputation of the window.
  return nearest_rank(sorted, target) * (1.0 + 1e-12) + 1e-12;
}

FloorReport pointmass_floor(const Model& model, std::size_t n, double c) {
  require_n(n);
  FloorReport out;
  out.n = n;
  out.c = c;
  double best = std::numeric_limits<double>::infinity();
  for_each_typical_point(model, n, c, [&](const UVStats& uv) {
    ++out.points;
    const double lp = log_uv_pmf(model, n, uv);
    if (lp < best) {
      best = lp;
      out.argmin = uv;
    }
  });
  if (out.points == 0) throw Error(ErrorKind::infeasible, "typical window holds no support point");
  out.min_pmf = std::exp(best);
  out.scaled = static_cast<double>(n) * out.min_pmf;
  return out;
}

double chebyshev_bound(double zeta) {
  if (!(zeta > 0.0)) throw Error(ErrorKind::validation, "zeta must be > 0");
  return 1.0 / (zeta * zeta);
}

double hoeffding_bound(double delta, double a, std::size_t n) {
  if (!(delta > 0.0)) throw Error(ErrorKind::validation, "delta must be > 0");
  if (!(a > 0.0)) throw Error(ErrorKind::validation, "a must be > 0");
  if (n == 0) throw Error(ErrorKind::validation, "n must be positive");
  return 2.0 * std::exp(-delta * delta * static_cast<double>(n) / (2.0 * a * a));
}

namespace {

std::vector<double> block_sums(const BlockModelParams& params, std::size_t m, std::size_t trials,
                               const RunOptions& opts) {
  require_samples(trials, 1);
  if (m == 0) throw Error(ErrorKind::validation, "m must be positive");
  return run_samples<double>(trials, opts.seed, opts.workers, [] { return 0; }, [&](std::size_t, RandomStream& rng, int&) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double x = rng.uniform();
      s += x < params.q1() ? params.l() - 1 : (x < params.q1() + params.q2() ? params.l() : params.l() + 1);
    }
    return s;
  });
}

}  // namespace

TailCheck block_sum_hoeffding(const BlockModelParams& params, std::size_t m, double delta, std::size_t trials,
                              const RunOptions& opts) {
  const double mu = params.mu();
  const double a = std::max(std::abs(params.l() - 1 - mu), std::abs(params.l() + 1 - mu));
  TailCheck out;
  out.bound = hoeffding_bound(delta, a, m);
  std::size_t hits = 0;
  for (double s : block_sums(params, m, trials, opts)) {
    if (std::abs(s / static_cast<double>(m) - mu) >= delta) ++hits;
  }
  out.empirical = proportion_report("hoeffding_tail", hits, trials, opts);
  return out;
}

TailCheck block_sum_chebyshev(const BlockModelParams& params, std::size_t m, double zeta, std::size_t trials,
                              const RunOptions& opts) {
  const double mu = params.mu();
  const double d = params.q3() - params.q1();
  const double sd = std::sqrt(static_cast<double>(m) * (params.q1() + params.q3() - d * d));
  TailCheck out;
  out.bound = chebyshev_bound(zeta);
  std::size_t hits = 0;
  for (double s : block_sums(params, m, trials, opts)) {
    if (std::abs(s - static_cast<double>(m) * mu) >= zeta * sd) ++hits;
  }
  out.empirical = proportion_report("chebyshev_tail", hits, trials, opts);
  return out;
}

}  // namespace seqfluct
