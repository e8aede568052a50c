#include "seqfluct/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "seqfluct/error.hpp"

namespace seqfluct {

double law_mean(const IntLaw& law) {
  double m = 0.0;
  for (std::size_t i = 0; i < law.size(); ++i) m += law.probs[i] * static_cast<double>(law.support[i]);
  return m;
}

double law_variance(const IntLaw& law) {
  const double m = law_mean(law);
  double v = 0.0;
  for (std::size_t i = 0; i < law.size(); ++i) {
    const double d = static_cast<double>(law.support[i]) - m;
    v += law.probs[i] * d * d;
  }
  return v;
}

double log_binomial_pmf(std::int64_t m, std::int64_t k, double p) {
  if (k < 0 || k > m) return -std::numeric_limits<double>::infinity();
  if (p <= 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return k == m ? 0.0 : -std::numeric_limits<double>::infinity();
  const double mm = static_cast<double>(m), kk = static_cast<double>(k);
  return std::lgamma(mm + 1) - std::lgamma(kk + 1) - std::lgamma(mm - kk + 1) + kk * std::log(p) +
         (mm - kk) * std::log1p(-p);
}

namespace {

void block_strings_rec(const BlockModelParams& params, std::size_t n, std::vector<Symbol>& prefix,
                       Symbol color, double prob, std::vector<std::pair<Sequence, double>>& out) {
  const std::size_t rem = n - prefix.size();
  const std::size_t l = static_cast<std::size_t>(params.l());
  if (rem >= 1 && rem <= l + 1) {
    std::vector<Symbol> data = prefix;
    data.insert(data.end(), rem, color);
    out.emplace_back(Sequence(binary_alphabet(), std::move(data)),
                     prob * params.tail(static_cast<std::int64_t>(rem)));
  }
  for (int i = 0; i < 3; ++i) {
    const std::size_t w = l - 1 + static_cast<std::size_t>(i);
    if (w >= rem) continue;
    prefix.insert(prefix.end(), w, color);
    block_strings_rec(params, n, prefix, color ^ 1, prob * params.q(i), out);
    prefix.resize(prefix.size() - w);
  }
}

const IidModel* as_iid(const Model& model) { return std::get_if<IidModel>(&model); }

double iid_other_weight(const IidModel& m) { return 1.0 - m.dist[m.a] - m.dist[m.b]; }

}  // namespace

std::vector<std::pair<Sequence, double>> enumerate_block_strings(const BlockModelParams& params,
                                                                std::size_t n) {
  std::vector<std::pair<Sequence, double>> out;
  if (n == 0) throw Error(ErrorKind::validation, "n must be positive");
  std::vector<Symbol> prefix;
  prefix.reserve(n);
  for (Symbol first : {Symbol{0}, Symbol{1}}) block_strings_rec(params, n, prefix, first, 0.5, out);
  return out;
}

double enumeration_size(const Model& model, std::size_t n) {
  if (const auto* iid = as_iid(model)) {
    return std::pow(static_cast<double>(iid->alphabet->size()), 2.0 * static_cast<double>(n));
  }
  // Strings are compositions of n; count them by a small DP instead of enumerating.
  const auto& params = std::get<BlockModel>(model).params;
  const std::size_t l = static_cast<std::size_t>(params.l());
  std::vector<double> ways(n + 1, 0.0);  // ways[k]: block sequences covering exactly k letters
  ways[0] = 1.0;
  for (std::size_t k = 1; k <= n; ++k) {
    for (std::size_t w = l - 1; w <= l + 1; ++w) {
      if (w <= k) ways[k] += ways[k - w];
    }
  }
  double strings = 0.0;
  for (std::size_t r = 1; r <= std::min(n, l + 1); ++r) strings += ways[n - r];
  strings *= 2.0;
  return strings * strings;
}

void for_each_outcome(const Model& model, std::size_t n,
                      const std::function<void(const SequencePair&, double)>& visit) {
  if (n == 0) throw Error(ErrorKind::validation, "n must be positive");
  if (enumeration_size(model, n) > kEnumerationLimit) {
    throw Error(ErrorKind::guard, "exhaustive enumeration exceeds 1e7 pairs at n = " + std::to_string(n));
  }
  if (const auto* iid = as_iid(model)) {
    const std::size_t k = iid->alphabet->size();
    const std::size_t len = 2 * n;
    std::vector<Symbol> digits(len, 0);
    while (true) {
      double p = 1.0;
      for (Symbol s : digits) p *= iid->dist[s];
      std::vector<Symbol> xs(digits.begin(), digits.begin() + static_cast<std::ptrdiff_t>(n));
      std::vector<Symbol> ys(digits.begin() + static_cast<std::ptrdiff_t>(n), digits.end());
      visit(SequencePair(Sequence(iid->alphabet, std::move(xs)), Sequence(iid->alphabet, std::move(ys))), p);
      std::size_t pos = len;
      while (pos > 0) {
        --pos;
        if (++digits[pos] < k) break;
        digits[pos] = 0;
        if (pos == 0) return;
      }
    }
  }
  const auto strings = enumerate_block_strings(std::get<BlockModel>(model).params, n);
  for (const auto& [x, px] : strings) {
    for (const auto& [y, py] : strings) visit(SequencePair(x, y), px * py);
  }
}

PairLaw enumerate_model(const Model& model, std::size_t n) {
  PairLaw law;
  for_each_outcome(model, n, [&](const SequencePair& z, double p) {
    law.support.push_back(z);
    law.probs.push_back(p);
  });
  return law;
}

PairLaw conditional_law(const Model& model, std::size_t n, const UVStats& uv) {
  std::map<SequencePair, double> weights;
  for_each_outcome(model, n, [&](const SequencePair& z, double p) {
    if (p > 0.0 && model_uv(model, z) == uv) weights[z] += p;
  });
  if (weights.empty()) throw Error(ErrorKind::infeasible, "empty fiber for the requested (u, v)");
  return make_law(weights);
}

PairLaw conditional_law_closed_form(const Model& model, std::size_t n, const UVStats& uv) {
  PairLaw law;
  if (const auto* iid = as_iid(model)) {
    const double other = iid_other_weight(*iid);
    const double two_n = 2.0 * static_cast<double>(n);
    const double u = static_cast<double>(uv.u), v = static_cast<double>(uv.v[0]);
    const double log_multinomial =
        std::lgamma(two_n + 1) - std::lgamma(u + 1) - std::lgamma(v - u + 1) - std::lgamma(two_n - v + 1);
    for_each_outcome(model, n, [&](const SequencePair& z, double p) {
      if (p <= 0.0 || model_uv(model, z) != uv) return;
      double log_p = -log_multinomial;
      for (const Sequence* s : {&z.x, &z.y}) {
        for (Symbol c : s->data()) {
          if (c != iid->a && c != iid->b) log_p += std::log(iid->dist[c] / other);
        }
      }
      law.support.push_back(z);
      law.probs.push_back(std::exp(log_p));
    });
  } else {
    const auto& params = std::get<BlockModel>(model).params;
    const int l = params.l();
    const auto blocks = try_tur_to_blocks(uv.t(), uv.u, uv.r(), static_cast<std::int64_t>(n), l);
    if (!blocks) throw Error(ErrorKind::infeasible, "empty fiber for the requested (u, v)");
    const double t = static_cast<double>(uv.t());
    const double log_multinomial = std::lgamma(t + 1) - std::lgamma(static_cast<double>(blocks->b1) + 1) -
                                   std::lgamma(static_cast<double>(blocks->b2) + 1) -
                                   std::lgamma(static_cast<double>(blocks->b3) + 1);
    const double px = 0.5 * std::exp(-log_multinomial);
    for_each_outcome(model, n, [&](const SequencePair& z, double p) {
      if (p <= 0.0 || model_uv(model, z) != uv) return;
      law.support.push_back(z);
      law.probs.push_back(px * block_seq_prob(z.y, params, n));
    });
  }
  if (law.support.empty()) throw Error(ErrorKind::infeasible, "empty fiber for the requested (u, v)");
  return law;
}

PairLaw pushforward(const Model& model, std::size_t n, const UVStats& uv, const Transform& t) {
  return pushforward_law(conditional_law(model, n, uv), t);
}

PairLaw pushforward_law(const PairLaw& law, const Transform& t) {
  std::map<SequencePair, double> weights;
  for (std::size_t i = 0; i < law.size(); ++i) {
    if (!is_applicable(law.support[i], t)) {
      throw Error(ErrorKind::inapplicable, "transformation inapplicable on part of the fiber");
    }
    for (const auto& item : outcomes(law.support[i], t).items) weights[item.z] += law.probs[i] * item.prob;
  }
  return make_law(weights);
}

std::map<UVStats, PairLaw> conditional_laws(const Model& model, std::size_t n) {
  std::map<UVStats, std::map<SequencePair, double>> groups;
  for_each_outcome(model, n, [&](const SequencePair& z, double p) {
    if (p > 0.0) groups[model_uv(model, z)][z] += p;
  });
  std::map<UVStats, PairLaw> out;
  for (const auto& [uv, weights] : groups) out.emplace(uv, make_law(weights));
  return out;
}

std::vector<UVStats> support_points(const Model& model, std::size_t n) {
  std::map<UVStats, double> seen;
  for_each_outcome(model, n, [&](const SequencePair& z, double p) {
    if (p > 0.0) seen[model_uv(model, z)] += p;
  });
  std::vector<UVStats> out;
  out.reserve(seen.size());
  for (const auto& [uv, p] : seen) out.push_back(uv);
  return out;
}

std::vector<std::int64_t> fiber(const Model& model, std::size_t n, std::array<std::int64_t, 2> v) {
  std::vector<std::int64_t> out;
  const std::int64_t nn = static_cast<std::int64_t>(n);
  if (const auto* iid = as_iid(model)) {
    if (v[0] < 0 || v[0] > 2 * nn || v[1] != 0) return out;
    // With no other letters every position is a or b.
    if (iid_other_weight(*iid) <= 0.0 && v[0] != 2 * nn) return out;
    for (std::int64_t u = 0; u <= v[0]; ++u) out.push_back(u);
    return out;
  }
  const int l = std::get<BlockModel>(model).params.l();
  for (std::int64_t u = -v[0]; u <= v[0]; ++u) {
    if (try_tur_to_blocks(v[0], u, v[1], nn, l)) out.push_back(u);
  }
  return out;
}

ExactMoments exact_moments(const Model& model, std::size_t n, const ScoringScheme& scheme) {
  const Scorer scorer(scheme);
  struct Group {
    double p = 0.0;
    double sum = 0.0;
  };
  std::map<UVStats, Group> groups;
  double mean = 0.0;
  for_each_outcome(model, n, [&](const SequencePair& z, double p) {
    if (p <= 0.0) return;
    const double l = scorer.score(z);
    mean += p * l;
    auto& g = groups[model_uv(model, z)];
    g.p += p;
    g.sum += p * l;
  });
  ExactMoments out;
  out.mean = mean;
  for (const auto& [uv, g] : groups) {
    const double d = g.sum / g.p - mean;
    out.between += g.p * d * d;
  }
  // Second pass on centered values keeps the split free of cancellation.
  for_each_outcome(model, n, [&](const SequencePair& z, double p) {
    if (p <= 0.0) return;
    const double l = scorer.score(z);
    const auto& g = groups.at(model_uv(model, z));
    const double d = l - mean;
    const double w = l - g.sum / g.p;
    out.variance += p * d * d;
    out.within += p * w * w;
  });
  return out;
}

std::map<UVStats, ConditionalMean> exact_conditional_means(const Model& model, std::size_t n,
                                                          const ScoringScheme& scheme) {
  const Scorer scorer(scheme);
  std::map<UVStats, ConditionalMean> out;
  for_each_outcome(model, n, [&](const SequencePair& z, double p) {
    if (p <= 0.0) return;
    auto& c = out[model_uv(model, z)];
    c.prob += p;
    c.mean += p * scorer.score(z);
  });
  for (auto& [uv, c] : out) c.mean /= c.prob;
  return out;
}

double log_uv_pmf(const Model& model, std::size_t n, const UVStats& uv) {
  if (const auto* iid = as_iid(model)) {
    const double p = iid->dist[iid->a] + iid->dist[iid->b];
    const double pb = iid->dist[iid->b] / p;
    const std::int64_t two_n = 2 * static_cast<std::int64_t>(n);
    return log_binomial_pmf(two_n, uv.v[0], p) + log_binomial_pmf(uv.v[0], uv.u, pb);
  }
  return log_tur_pmf(uv.t(), uv.u, uv.r(), std::get<BlockModel>(model).params, n);
}

double uv_pmf(const Model& model, std::size_t n, const UVStats& uv) {
  return std::exp(log_uv_pmf(model, n, uv));
}

double quotient_window_k(const BlockModelParams& params, std::size_t n, double c) {
  const Model model = BlockModel{params};
  const TypicalSets sets(model, n, c);
  const Interval tw = sets.v_window();
  const Interval uw = sets.u_window(0);
  const std::int64_t nn = static_cast<std::int64_t>(n);
  const double root = std::sqrt(static_cast<double>(n));
  double k = 0.0;
  for (std::int64_t t = static_cast<std::int64_t>(std::ceil(tw.lo)); t <= tw.hi; ++t) {
    for (std::int64_t r = 1; r <= params.l() + 1; ++r) {
      for (std::int64_t u = static_cast<std::int64_t>(std::ceil(uw.lo)); u + 4 <= uw.hi; ++u) {
        const auto lo = try_tur_to_blocks(t, u, r, nn, params.l());
        if (!lo || !try_tur_to_blocks(t, u + 4, r, nn, params.l())) continue;
        const double ratio = std::exp(log_tur_pmf(t, u + 4, r, params, n) - log_tur_pmf(t, u, r, params, n));
        k = std::max(k, std::abs(ratio - 1.0) * root);
      }
    }
  }
  return k;
}

double binomial_lclt_floor(std::int64_t m, double p, double beta) {
  const double mm = static_cast<double>(m);
  const double half = beta * std::sqrt(mm);
  double best = std::numeric_limits<double>::infinity();
  for (std::int64_t i = static_cast<std::int64_t>(std::ceil(mm * p - half)); i <= mm * p + half; ++i) {
    if (i < 0 || i > m) continue;
    best = std::min(best, std::sqrt(mm) * std::exp(log_binomial_pmf(m, i, p)));
  }
  return best;
}

double trinomial_lclt_floor(std::int64_t m, const std::array<double, 3>& q, double beta) {
  const double mm = static_cast<double>(m);
  const double half = beta * std::sqrt(mm);
  double best = std::numeric_limits<double>::infinity();
  for (std::int64_t b1 = static_cast<std::int64_t>(std::ceil(mm * q[0] - half)); b1 <= mm * q[0] + half; ++b1) {
    for (std::int64_t b2 = static_cast<std::int64_t>(std::ceil(mm * q[1] - half)); b2 <= mm * q[1] + half; ++b2) {
      const std::int64_t b3 = m - b1 - b2;
      if (b1 < 0 || b2 < 0 || b3 < 0) continue;
      const double lp = std::lgamma(mm + 1) - std::lgamma(static_cast<double>(b1) + 1) -
                        std::lgamma(static_cast<double>(b2) + 1) - std::lgamma(static_cast<double>(b3) + 1) +
                        static_cast<double>(b1) * std::log(q[0]) + static_cast<double>(b2) * std::log(q[1]) +
                        static_cast<double>(b3) * std::log(q[2]);
      best = std::min(best, mm * std::exp(lp));
    }
  }
  return best;
}

double binomial_window_variance(std::int64_t m, double p, double beta) {
  const double mm = static_cast<double>(m);
  const double half = beta * std::sqrt(mm);
  double w = 0.0, s1 = 0.0;
  const std::int64_t lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(mm * p - half)));
  const std::int64_t hi = std::min<std::int64_t>(m, static_cast<std::int64_t>(std::floor(mm * p + half)));
  for (std::int64_t i = lo; i <= hi; ++i) {
    const double pi = std::exp(log_binomial_pmf(m, i, p));
    w += pi;
    s1 += pi * static_cast<double>(i);
  }
  if (w <= 0.0) return 0.0;
  const double mean = s1 / w;
  double var = 0.0;
  for (std::int64_t i = lo; i <= hi; ++i) {
    const double d = static_cast<double>(i) - mean;
    var += std::exp(log_binomial_pmf(m, i, p)) * d * d;
  }
  return var / w / mm;
}

namespace {

OracleCheckResult transform_check(const std::string& name, const Model& model, std::size_t n) {
  const Transform t = std::holds_alternative<IidModel>(model)
                          ? make_letter_swap(std::get<IidModel>(model).a, std::get<IidModel>(model).b)
                          : make_block_transform(std::get<BlockModel>(model).params.l());
  const int k0 = transform_shift(t);
  const auto laws = conditional_laws(model, n);
  OracleCheckResult out{name, true, 0.0, "max_tv", 0};
  for (const auto& [uv, law] : laws) {
    bool applicable = true;
    for (const auto& z : law.support) applicable = applicable && is_applicable(z, t);
    if (!applicable) continue;
    UVStats target = uv;
    target.u += k0;
    const auto it = laws.find(target);
    // The image of a whole fiber must be a fiber of the model.
    const double tv = it == laws.end() ? 1.0 : tv_distance(pushforward_law(law, t), it->second);
    out.metric = std::max(out.metric, tv);
    ++out.cases;
  }
  out.pass = out.cases > 0 && out.metric <= kOracleTolerance;
  return out;
}

}  // namespace

OracleCheckResult oracle_check(const std::string& check, const Model& model, std::size_t n,
                               const ScoringScheme& scheme) {
  const bool iid = std::holds_alternative<IidModel>(model);
  if (check == "tilde2") {
    if (!iid) throw Error(ErrorKind::validation, "check: tilde2 needs the iid model");
    return transform_check(check, model, n);
  }
  if (check == "tilde") {
    if (iid) throw Error(ErrorKind::validation, "check: tilde needs the block model");
    return transform_check(check, model, n);
  }
  if (check == "pmf") {
    OracleCheckResult out{check, true, 0.0, "max_deviation", 0};
    std::map<UVStats, double> mass;
    for_each_outcome(model, n, [&](const SequencePair& z, double p) {
      if (p > 0.0) mass[model_uv(model, z)] += p;
    });
    for (const auto& [uv, law] : conditional_laws(model, n)) {
      out.metric = std::max(out.metric, std::abs(mass.at(uv) - uv_pmf(model, n, uv)));
      out.metric = std::max(out.metric, tv_distance(conditional_law_closed_form(model, n, uv), law));
      ++out.cases;
    }
    out.pass = out.metric <= kOracleTolerance;
    return out;
  }
  if (check == "deco") {
    const ExactMoments m = exact_moments(model, n, scheme);
    OracleCheckResult out{check, true, std::abs(m.variance - m.within - m.between), "residual", 1};
    out.pass = out.metric <= kOracleTolerance * std::max(1.0, m.variance);
    return out;
  }
  if (check == "fiber") {
    std::map<std::array<std::int64_t, 2>, std::vector<std::int64_t>> seen;
    for (const auto& uv : support_points(model, n)) seen[uv.v].push_back(uv.u);
    OracleCheckResult out{check, true, 0.0, "mismatches", 0};
    const std::int64_t k0 = model_span(model);
    for (const auto& [v, us] : seen) {
      ++out.cases;
      if (fiber(model, n, v) != us) out.metric += 1;
      for (std::size_t i = 1; i < us.size(); ++i) {
        if (us[i] - us[i - 1] != k0) out.metric += 1;
      }
    }
    out.pass = out.metric == 0.0;
    return out;
  }
  throw Error(ErrorKind::validation, "check: unknown oracle check '" + check + "'");
}

}  // namespace seqfluct
