#include "seqfluct/genmodels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "seqfluct/error.hpp"

namespace seqfluct {

namespace {

constexpr std::size_t kLogSpaceThreshold = 100;

double log_multinomial3(std::int64_t b1, std::int64_t b2, std::int64_t b3) {
  const auto t = static_cast<double>(b1 + b2 + b3);
  return std::lgamma(t + 1.0) - std::lgamma(static_cast<double>(b1) + 1.0) -
         std::lgamma(static_cast<double>(b2) + 1.0) - std::lgamma(static_cast<double>(b3) + 1.0);
}

double binomial(std::int64_t n, std::int64_t k) {
  k = std::min(k, n - k);
  double out = 1.0;
  for (std::int64_t i = 1; i <= k; ++i) {
    out = out * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return out;
}

double multinomial3(std::int64_t b1, std::int64_t b2, std::int64_t b3) {
  return binomial(b1 + b2 + b3, b1) * binomial(b2 + b3, b2);
}

void require_binary(const Sequence& x) {
  if (x.alphabet().size() != 2) {
    throw Error(ErrorKind::malformed, "block model sequences must be binary");
  }
}

}  // namespace

BlockModelParams::BlockModelParams(int l, double q1, double q2, double q3)
    : l_(l), q_{q1, q2, q3} {
  if (l_ < 2) throw Error(ErrorKind::validation, "l: block length must be >= 2");
  const char* names[3] = {"q1", "q2", "q3"};
  for (int i = 0; i < 3; ++i) {
    if (!(q_[i] > 0.0 && q_[i] < 1.0)) {
      throw Error(ErrorKind::validation, std::string(names[i]) + ": must lie in (0, 1)");
    }
  }
  const double total = q_[0] + q_[1] + q_[2];
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg << "q3: q1 + q2 + q3 must equal 1 (got " << total << ")";
    throw Error(ErrorKind::validation, msg.str());
  }
}

double BlockModelParams::tail(std::int64_t r) const {
  if (r < 1 || r > l_ + 1) {
    throw Error(ErrorKind::malformed, "trailing run length outside 1..l+1");
  }
  if (r <= l_ - 1) return 1.0;
  if (r == l_) return q_[1] + q_[2];
  return q_[2];
}

IidModel::IidModel(AlphabetPtr alphabet_, SymbolDist dist_, Symbol a_, Symbol b_)
    : alphabet(std::move(alphabet_)), dist(std::move(dist_)), a(a_), b(b_) {
  if (!alphabet) throw Error(ErrorKind::validation, "iid model without alphabet");
  if (dist.size() != alphabet->size()) {
    throw Error(ErrorKind::dimension, "probs size differs from alphabet size");
  }
  if (a >= alphabet->size() || b >= alphabet->size()) {
    throw Error(ErrorKind::validation, "letters a, b must be in the alphabet");
  }
  if (a == b) throw Error(ErrorKind::validation, "letters a and b must differ");
}

std::vector<std::int64_t> run_lengths(std::span<const Symbol> x) {
  std::vector<std::int64_t> runs;
  std::size_t i = 0;
  while (i < x.size()) {
    std::size_t j = i + 1;
    while (j < x.size() && x[j] == x[i]) ++j;
    runs.push_back(static_cast<std::int64_t>(j - i));
    i = j;
  }
  return runs;
}

Sequence sample_iid(std::size_t n, const AlphabetPtr& alphabet, const SymbolDist& dist,
                    RandomStream& rng) {
  if (dist.size() != alphabet->size()) {
    throw Error(ErrorKind::dimension, "probs size differs from alphabet size");
  }
  std::discrete_distribution<int> draw(dist.probs().begin(), dist.probs().end());
  std::vector<Symbol> data(n);
  for (auto& s : data) s = static_cast<Symbol>(draw(rng));
  return Sequence(alphabet, std::move(data));
}

Sequence sample_block(std::size_t n, const BlockModelParams& params, RandomStream& rng) {
  if (n == 0) throw Error(ErrorKind::validation, "block model needs n >= 1");
  std::vector<Symbol> data;
  data.reserve(n + params.l() + 1);
  Symbol color = rng.coin() ? 1 : 0;
  const double c1 = params.q1();
  const double c2 = params.q1() + params.q2();
  while (data.size() < n) {
    const double draw = rng.uniform();
    const int len = params.l() - 1 + (draw < c1 ? 0 : (draw < c2 ? 1 : 2));
    data.insert(data.end(), static_cast<std::size_t>(len), color);
    color ^= 1;
  }
  data.resize(n);
  return Sequence(binary_alphabet(), std::move(data));
}

Sequence block_sequence(std::span<const std::int64_t> lengths, Symbol first, std::size_t n) {
  if (first > 1) throw Error(ErrorKind::validation, "first color must be 0 or 1");
  std::vector<Symbol> data;
  data.reserve(n);
  Symbol color = first;
  for (std::int64_t len : lengths) {
    if (len < 1) throw Error(ErrorKind::validation, "block lengths must be positive");
    for (std::int64_t k = 0; k < len && data.size() < n; ++k) data.push_back(color);
    color ^= 1;
    if (data.size() >= n) break;
  }
  if (data.size() < n) throw Error(ErrorKind::validation, "block lengths cover fewer than n symbols");
  return Sequence(binary_alphabet(), std::move(data));
}

BlockStats block_stats(const Sequence& x, int l) {
  require_binary(x);
  if (x.empty()) throw Error(ErrorKind::malformed, "empty sequence has no trailing run");
  if (l < 2) throw Error(ErrorKind::validation, "l: block length must be >= 2");
  const auto runs = run_lengths(x.data());
  BlockStats stats;
  for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
    const std::int64_t len = runs[i];
    if (len == l - 1) {
      ++stats.b1;
    } else if (len == l) {
      ++stats.b2;
    } else if (len == l + 1) {
      ++stats.b3;
    } else {
      throw Error(ErrorKind::malformed, "interior block of length " + std::to_string(len) +
                                            " outside {l-1, l, l+1}");
    }
  }
  stats.r = runs.back();
  if (stats.r > l + 1) {
    throw Error(ErrorKind::malformed, "trailing run longer than l+1");
  }
  return stats;
}

UVStats uv_from_blocks(const BlockStats& s, std::int64_t n, int l) {
  if (s.b1 < 0 || s.b2 < 0 || s.b3 < 0 || s.r < 1 || s.r > l + 1) {
    throw Error(ErrorKind::validation, "block counts must be >= 0 and r in 1..l+1");
  }
  if ((l - 1) * s.b1 + l * s.b2 + (l + 1) * s.b3 + s.r != n) {
    throw Error(ErrorKind::validation, "block counts are inconsistent with n");
  }
  return UVStats::block(s.b1 + s.b2 + s.b3, s.b2 - s.b1 - s.b3, s.r);
}

std::optional<BlockStats> try_tur_to_blocks(std::int64_t t, std::int64_t u, std::int64_t r,
                                            std::int64_t n, int l) {
  if (r < 1 || r > l + 1 || t < 0) return std::nullopt;
  // 4 b1 = (2l+1) t - u - 2(n-r);  2 b2 = t + u;  4 b3 = -(2l-1) t - u + 2(n-r)
  const std::int64_t four_b1 = (2 * l + 1) * t - u - 2 * (n - r);
  const std::int64_t two_b2 = t + u;
  const std::int64_t four_b3 = -(2 * l - 1) * t - u + 2 * (n - r);
  if (four_b1 < 0 || two_b2 < 0 || four_b3 < 0) return std::nullopt;
  if (four_b1 % 4 != 0 || two_b2 % 2 != 0 || four_b3 % 4 != 0) return std::nullopt;
  return BlockStats{four_b1 / 4, two_b2 / 2, four_b3 / 4, r};
}

BlockStats tur_to_blocks(std::int64_t t, std::int64_t u, std::int64_t r, std::int64_t n, int l) {
  auto stats = try_tur_to_blocks(t, u, r, n, l);
  if (!stats) {
    std::ostringstream msg;
    msg << "(t,u,r)=(" << t << "," << u << "," << r << ") has no nonnegative integer block counts";
    throw Error(ErrorKind::infeasible, msg.str());
  }
  return *stats;
}

double log_block_seq_prob(const Sequence& x, const BlockModelParams& params, std::size_t n) {
  if (x.size() != n) throw Error(ErrorKind::dimension, "sequence length differs from n");
  const BlockStats s = block_stats(x, params.l());
  return std::log(0.5) + static_cast<double>(s.b1) * std::log(params.q1()) +
         static_cast<double>(s.b2) * std::log(params.q2()) +
         static_cast<double>(s.b3) * std::log(params.q3()) + std::log(params.tail(s.r));
}

double block_seq_prob(const Sequence& x, const BlockModelParams& params, std::size_t n) {
  if (n > kLogSpaceThreshold) return std::exp(log_block_seq_prob(x, params, n));
  if (x.size() != n) throw Error(ErrorKind::dimension, "sequence length differs from n");
  const BlockStats s = block_stats(x, params.l());
  return 0.5 * std::pow(params.q1(), static_cast<double>(s.b1)) *
         std::pow(params.q2(), static_cast<double>(s.b2)) *
         std::pow(params.q3(), static_cast<double>(s.b3)) * params.tail(s.r);
}

double log_tur_pmf(std::int64_t t, std::int64_t u, std::int64_t r, const BlockModelParams& params,
                   std::size_t n) {
  const auto s = try_tur_to_blocks(t, u, r, static_cast<std::int64_t>(n), params.l());
  if (!s) return -std::numeric_limits<double>::infinity();
  return log_multinomial3(s->b1, s->b2, s->b3) + static_cast<double>(s->b1) * std::log(params.q1()) +
         static_cast<double>(s->b2) * std::log(params.q2()) +
         static_cast<double>(s->b3) * std::log(params.q3()) + std::log(params.tail(r));
}

double tur_pmf(std::int64_t t, std::int64_t u, std::int64_t r, const BlockModelParams& params,
               std::size_t n) {
  if (n > kLogSpaceThreshold) return std::exp(log_tur_pmf(t, u, r, params, n));
  const auto s = try_tur_to_blocks(t, u, r, static_cast<std::int64_t>(n), params.l());
  if (!s) return 0.0;
  return multinomial3(s->b1, s->b2, s->b3) * std::pow(params.q1(), static_cast<double>(s->b1)) *
         std::pow(params.q2(), static_cast<double>(s->b2)) *
         std::pow(params.q3(), static_cast<double>(s->b3)) * params.tail(r);
}

UVStats iid_uv(const SequencePair& z, Symbol a, Symbol b) {
  if (a == b) throw Error(ErrorKind::validation, "letters a and b must differ");
  const auto nb = static_cast<std::int64_t>(z.x.count(b) + z.y.count(b));
  const auto na = static_cast<std::int64_t>(z.x.count(a) + z.y.count(a));
  return UVStats::iid(nb, na + nb);
}

SequencePair sample_pair(const Model& model, std::size_t n, RandomStream& rng) {
  return std::visit(
      [&](const auto& m) -> SequencePair {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, IidModel>) {
          Sequence x = sample_iid(n, m.alphabet, m.dist, rng);
          Sequence y = sample_iid(n, m.alphabet, m.dist, rng);
          return {std::move(x), std::move(y)};
        } else {
          Sequence x = sample_block(n, m.params, rng);
          Sequence y = sample_block(n, m.params, rng);
          return {std::move(x), std::move(y)};
        }
      },
      model);
}

UVStats model_uv(const Model& model, const SequencePair& z) {
  if (const auto* iid = std::get_if<IidModel>(&model)) return iid_uv(z, iid->a, iid->b);
  const auto& params = std::get<BlockModel>(model).params;
  return uv_from_blocks(block_stats(z.x, params.l()), static_cast<std::int64_t>(z.n()), params.l());
}

int model_span(const Model& model) { return std::holds_alternative<IidModel>(model) ? 1 : 4; }

std::string describe(const Model& model) {
  std::ostringstream out;
  out.precision(17);
  if (const auto* iid = std::get_if<IidModel>(&model)) {
    out << "iid(alphabet=" << iid->alphabet->symbols() << ",probs=";
    for (std::size_t i = 0; i < iid->dist.size(); ++i) out << (i ? ":" : "") << iid->dist[i];
    out << ",a=" << iid->alphabet->name(iid->a) << ",b=" << iid->alphabet->name(iid->b) << ")";
  } else {
    const auto& p = std::get<BlockModel>(model).params;
    out << "block(l=" << p.l() << ",q=" << p.q1() << ":" << p.q2() << ":" << p.q3() << ")";
  }
  return out.str();
}

TypicalSets::TypicalSets(const Model& model, std::size_t n, double c) : c_(c) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw Error(ErrorKind::validation, "c must be >= 0");
  const double nn = static_cast<double>(n);
  if (const auto* iid = std::get_if<IidModel>(&model)) {
    is_block_ = false;
    const double p = iid->dist[iid->a] + iid->dist[iid->b];
    pb_ = iid->dist[iid->b] / p;
    const double half = c * std::sqrt(2.0 * nn);
    v_window_ = {2.0 * nn * p - half, 2.0 * nn * p + half};
  } else {
    is_block_ = true;
    const auto& params = std::get<BlockModel>(model).params;
    const double mu = params.mu();
    const double half = c * std::sqrt(nn);
    v_window_ = {nn / mu - half, nn / mu + half};
    const double center = nn / mu * (params.q2() - params.q1() - params.q3());
    u_block_ = {center - half, center + half};
    max_r_ = params.l() + 1;
  }
}

Interval TypicalSets::u_window(std::int64_t v0) const {
  if (is_block_) return u_block_;
  const double v = static_cast<double>(v0);
  const double half = c_ * std::sqrt(std::max(v, 0.0));
  return {v * pb_ - half, v * pb_ + half};
}

bool TypicalSets::contains(const UVStats& s) const {
  if (!v_window_.contains(static_cast<double>(s.v[0]))) return false;
  if (is_block_) {
    return s.r() >= 1 && s.r() <= max_r_ && u_block_.contains(static_cast<double>(s.u));
  }
  return s.u >= 0 && s.u <= s.v[0] && u_window(s.v[0]).contains(static_cast<double>(s.u));
}

TypicalSets typical_sets(const Model& model, std::size_t n, double c) {
  return TypicalSets(model, n, c);
}

}  // namespace seqfluct
