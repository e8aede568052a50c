#include "seqfluct/transforms.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <optional>

#include "seqfluct/error.hpp"
#include "seqfluct/genmodels.hpp"

namespace seqfluct {

namespace {

/// Run-length view of a binary string: first symbol plus run lengths.
struct Runs {
  Symbol first = 0;
  std::vector<std::int64_t> lengths;
};

Runs to_runs(const Sequence& x) {
  if (x.alphabet().size() != 2) {
    throw Error(ErrorKind::malformed, "block transformation needs a binary sequence");
  }
  if (x.empty()) throw Error(ErrorKind::malformed, "empty sequence");
  return {x[0], run_lengths(x.data())};
}

Sequence from_runs(const Runs& runs, const AlphabetPtr& alphabet) {
  std::vector<Symbol> data;
  Symbol color = runs.first;
  for (std::int64_t len : runs.lengths) {
    data.insert(data.end(), static_cast<std::size_t>(len), color);
    color ^= 1;
  }
  return Sequence(alphabet, std::move(data));
}

/// Indices of interior runs (blocks) of the given length.
std::vector<std::size_t> blocks_of_length(const Runs& runs, std::int64_t len) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i + 1 < runs.lengths.size(); ++i) {
    if (runs.lengths[i] == len) out.push_back(i);
  }
  return out;
}

void require_block_shape(const Sequence& x, int l) {
  // Throws malformed when x is not a block-model outcome.
  (void)block_stats(x, l);
}

Sequence with_symbol(const Sequence& s, std::size_t pos, Symbol value) {
  std::vector<Symbol> data(s.data().begin(), s.data().end());
  data[pos] = value;
  return Sequence(s.alphabet_ptr(), std::move(data));
}

Sequence regularize(const Runs& runs, std::size_t short_idx, std::size_t long_idx, int l,
                    const AlphabetPtr& alphabet) {
  Runs out = runs;
  out.lengths[short_idx] = l;
  out.lengths[long_idx] = l;
  return from_runs(out, alphabet);
}

void check_swap_letters(const SequencePair& z, const LetterSwap& s) {
  if (s.a >= z.x.alphabet().size() || s.b >= z.x.alphabet().size()) {
    throw Error(ErrorKind::validation, "swap letters outside the alphabet");
  }
}

}  // namespace

Transform make_letter_swap(Symbol a, Symbol b) {
  if (a == b) throw Error(ErrorKind::validation, "letter swap needs a != b");
  return LetterSwap{a, b};
}

Transform make_block_transform(int l) {
  if (l < 2) throw Error(ErrorKind::validation, "block transformation needs l >= 2");
  return BlockTransform{l};
}

int transform_shift(const Transform& t) noexcept {
  return std::holds_alternative<LetterSwap>(t) ? 1 : 4;
}

bool is_applicable(const SequencePair& z, const Transform& t) {
  if (const auto* s = std::get_if<LetterSwap>(&t)) {
    check_swap_letters(z, *s);
    return z.x.count(s->a) + z.y.count(s->a) > 0;
  }
  const int l = std::get<BlockTransform>(t).l;
  const BlockStats stats = block_stats(z.x, l);
  return stats.b1 >= 1 && stats.b3 >= 1;
}

SequencePair apply(const SequencePair& z, const Transform& t, RandomStream& rng) {
  if (const auto* s = std::get_if<LetterSwap>(&t)) {
    check_swap_letters(z, *s);
    const std::size_t in_x = z.x.count(s->a);
    const std::size_t total = in_x + z.y.count(s->a);
    if (total == 0) throw Error(ErrorKind::inapplicable, "letter swap: no occurrence of a");
    std::size_t pick = rng.below(total);
    const bool pick_x = pick < in_x;
    const Sequence& target = pick_x ? z.x : z.y;
    if (!pick_x) pick -= in_x;
    for (std::size_t i = 0; i < target.size(); ++i) {
      if (target[i] != s->a) continue;
      if (pick-- == 0) {
        Sequence changed = with_symbol(target, i, s->b);
        return pick_x ? SequencePair(std::move(changed), z.y) : SequencePair(z.x, std::move(changed));
      }
    }
    throw Error(ErrorKind::invariant, "letter swap: occurrence count out of sync");
  }
  const int l = std::get<BlockTransform>(t).l;
  require_block_shape(z.x, l);
  const Runs runs = to_runs(z.x);
  const auto shorts = blocks_of_length(runs, l - 1);
  const auto longs = blocks_of_length(runs, l + 1);
  if (shorts.empty() || longs.empty()) {
    throw Error(ErrorKind::inapplicable, "block transformation needs b1 >= 1 and b3 >= 1");
  }
  const std::size_t i = shorts[rng.below(shorts.size())];
  const std::size_t j = longs[rng.below(longs.size())];
  return {regularize(runs, i, j, l, z.x.alphabet_ptr()), z.y};
}

OutcomeSet outcomes(const SequencePair& z, const Transform& t) {
  std::vector<SequencePair> raw;
  if (const auto* s = std::get_if<LetterSwap>(&t)) {
    check_swap_letters(z, *s);
    for (std::size_t i = 0; i < z.x.size(); ++i) {
      if (z.x[i] == s->a) raw.emplace_back(with_symbol(z.x, i, s->b), z.y);
    }
    for (std::size_t i = 0; i < z.y.size(); ++i) {
      if (z.y[i] == s->a) raw.emplace_back(z.x, with_symbol(z.y, i, s->b));
    }
    if (raw.empty()) throw Error(ErrorKind::inapplicable, "letter swap: no occurrence of a");
  } else {
    const int l = std::get<BlockTransform>(t).l;
    require_block_shape(z.x, l);
    const Runs runs = to_runs(z.x);
    const auto shorts = blocks_of_length(runs, l - 1);
    const auto longs = blocks_of_length(runs, l + 1);
    if (shorts.empty() || longs.empty()) {
      throw Error(ErrorKind::inapplicable, "block transformation needs b1 >= 1 and b3 >= 1");
    }
    for (std::size_t i : shorts) {
      for (std::size_t j : longs) raw.emplace_back(regularize(runs, i, j, l, z.x.alphabet_ptr()), z.y);
    }
  }
  const double p = 1.0 / static_cast<double>(raw.size());
  std::map<SequencePair, std::size_t> multiplicity;
  std::vector<SequencePair> order;
  for (auto& pair : raw) {
    auto [it, inserted] = multiplicity.try_emplace(pair, 0);
    if (inserted) order.push_back(pair);
    ++it->second;
  }
  OutcomeSet set;
  set.raw_choices = raw.size();
  set.items.reserve(order.size());
  for (auto& pair : order) {
    const double prob = p * static_cast<double>(multiplicity.at(pair));
    set.items.push_back({std::move(pair), prob});
  }
  return set;
}

std::vector<SequencePair> preimages(const SequencePair& z_tilde, const Transform& t) {
  std::vector<SequencePair> out;
  if (const auto* s = std::get_if<LetterSwap>(&t)) {
    check_swap_letters(z_tilde, *s);
    for (std::size_t i = 0; i < z_tilde.x.size(); ++i) {
      if (z_tilde.x[i] == s->b) out.emplace_back(with_symbol(z_tilde.x, i, s->a), z_tilde.y);
    }
    for (std::size_t i = 0; i < z_tilde.y.size(); ++i) {
      if (z_tilde.y[i] == s->b) out.emplace_back(z_tilde.x, with_symbol(z_tilde.y, i, s->a));
    }
    return out;
  }
  const int l = std::get<BlockTransform>(t).l;
  if (z_tilde.x.empty() || z_tilde.x.alphabet().size() != 2) return out;
  const Runs runs = to_runs(z_tilde.x);
  // A run that is not a valid block makes z~ unreachable from any model outcome.
  for (std::size_t i = 0; i + 1 < runs.lengths.size(); ++i) {
    if (runs.lengths[i] < l - 1 || runs.lengths[i] > l + 1) return out;
  }
  if (runs.lengths.back() > l + 1) return out;
  const auto centrals = blocks_of_length(runs, l);
  for (std::size_t i : centrals) {
    for (std::size_t j : centrals) {
      if (i == j) continue;
      Runs pre = runs;
      pre.lengths[i] = l - 1;  // came from an (l-1)-block
      pre.lengths[j] = l + 1;  // came from an (l+1)-block
      out.emplace_back(from_runs(pre, z_tilde.x.alphabet_ptr()), z_tilde.y);
    }
  }
  return out;
}

GainProfile gain_profile_enumerated(const SequencePair& z, const Transform& t, const Scorer& scorer) {
  const OutcomeSet set = outcomes(z, t);
  GainProfile g;
  g.base_score = scorer.score(z);
  g.outcomes = set.raw_choices;
  g.min_gain = std::numeric_limits<double>::infinity();
  g.max_gain = -std::numeric_limits<double>::infinity();
  for (const auto& item : set.items) {
    const double gain = scorer.score(item.z) - g.base_score;
    g.expected_gain += item.prob * gain;
    g.min_gain = std::min(g.min_gain, gain);
    g.max_gain = std::max(g.max_gain, gain);
  }
  return g;
}

namespace {

constexpr std::size_t kTableGainMaxLength = 2048;

// Forward/backward tables of the gain DP: fwd[i][j] is the best gain of
// x[0..i) against y[0..j), bwd[i][j] of x[i..n) against y[j..n). A single
// substituted letter is then either left unmatched or matched to one partner.
template <typename T>
GainProfile swap_gain_tables(const SequencePair& z, const LetterSwap& s, const std::vector<T>& gain,
                             std::size_t k, T base_offset) {
  const auto x = z.x.data();
  const auto y = z.y.data();
  const std::size_t n = x.size();
  const std::size_t w = n + 1;
  std::vector<T> fwd(w * w, T{}), bwd(w * w, T{});
  for (std::size_t i = 1; i <= n; ++i) {
    const T* g = gain.data() + static_cast<std::size_t>(x[i - 1]) * k;
    for (std::size_t j = 1; j <= n; ++j) {
      fwd[i * w + j] = std::max({fwd[(i - 1) * w + j], fwd[i * w + j - 1],
                                 fwd[(i - 1) * w + j - 1] + g[y[j - 1]]});
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    const T* g = gain.data() + static_cast<std::size_t>(x[i]) * k;
    for (std::size_t j = n; j-- > 0;) {
      bwd[i * w + j] = std::max({bwd[(i + 1) * w + j], bwd[i * w + j + 1],
                                 bwd[(i + 1) * w + j + 1] + g[y[j]]});
    }
  }
  const T base = fwd[n * w + n];
  GainProfile out;
  out.base_score = static_cast<double>(base_offset + base);
  out.min_gain = std::numeric_limits<double>::infinity();
  out.max_gain = -std::numeric_limits<double>::infinity();
  double total = 0.0;
  auto record = [&](T best) {
    const double d = static_cast<double>(best - base);
    total += d;
    out.min_gain = std::min(out.min_gain, d);
    out.max_gain = std::max(out.max_gain, d);
    ++out.outcomes;
  };
  const T* gb_row = gain.data() + static_cast<std::size_t>(s.b) * k;
  for (std::size_t p = 0; p < n; ++p) {
    if (x[p] != s.a) continue;
    T best = fwd[p * w] + bwd[(p + 1) * w];
    for (std::size_t j = 0; j <= n; ++j) {
      best = std::max(best, fwd[p * w + j] + bwd[(p + 1) * w + j]);
      if (j < n) best = std::max(best, fwd[p * w + j] + gb_row[y[j]] + bwd[(p + 1) * w + j + 1]);
    }
    record(best);
  }
  for (std::size_t q = 0; q < n; ++q) {
    if (y[q] != s.a) continue;
    T best = fwd[q] + bwd[q + 1];
    for (std::size_t i = 0; i <= n; ++i) {
      best = std::max(best, fwd[i * w + q] + bwd[i * w + q + 1]);
      if (i < n) {
        best = std::max(best, fwd[i * w + q] + gain[static_cast<std::size_t>(x[i]) * k + s.b] +
                                  bwd[(i + 1) * w + q + 1]);
      }
    }
    record(best);
  }
  if (out.outcomes == 0) throw Error(ErrorKind::inapplicable, "letter swap: no occurrence of a");
  out.expected_gain = total / static_cast<double>(out.outcomes);
  return out;
}

GainProfile swap_gain_fast(const SequencePair& z, const LetterSwap& s, const ScoringScheme& scheme) {
  check_swap_letters(z, s);
  const std::size_t k = scheme.alphabet_size();
  const double base_offset = scheme.delta() * static_cast<double>(z.n());
  if (scheme.is_integral()) {
    std::vector<std::int64_t> gain(k * k);
    for (std::size_t i = 0; i < k * k; ++i) gain[i] = std::llround(scheme.table()[i] - scheme.delta());
    return swap_gain_tables<std::int64_t>(z, s, gain, k, std::llround(base_offset));
  }
  std::vector<double> gain(k * k);
  for (std::size_t i = 0; i < k * k; ++i) gain[i] = scheme.table()[i] - scheme.delta();
  return swap_gain_tables<double>(z, s, gain, k, base_offset);
}

// Block move on the LCS scheme. Outcome (i, j) lengthens short run i and
// shortens long run j. Split the new x at the deleted letter of run j: the
// side holding the insertion is rescanned once per short run i from a saved
// bit-parallel state, the other side is a plain prefix or suffix of x whose
// row is computed once. Each outcome then costs one O(n) max over the split
// point in y.
GainProfile block_gain_fast(const SequencePair& z, int l) {
  require_block_shape(z.x, l);
  const Runs runs = to_runs(z.x);
  const auto shorts = blocks_of_length(runs, l - 1);
  const auto longs = blocks_of_length(runs, l + 1);
  if (shorts.empty() || longs.empty()) {
    throw Error(ErrorKind::inapplicable, "block transformation needs b1 >= 1 and b3 >= 1");
  }
  const auto x = z.x.data();
  const auto y = z.y.data();
  const std::size_t n = x.size();
  const std::size_t m = runs.lengths.size();
  std::vector<std::size_t> start(m + 1, 0);
  for (std::size_t r = 0; r < m; ++r) start[r + 1] = start[r] + static_cast<std::size_t>(runs.lengths[r]);
  auto color = [&](std::size_t r) { return static_cast<Symbol>(runs.first ^ (r & 1u)); };
  std::vector<bool> is_long(m, false), is_short(m, false);
  for (std::size_t r : longs) is_long[r] = true;
  for (std::size_t r : shorts) is_short[r] = true;

  const LcsKernel fwd(y, 2);
  const std::vector<Symbol> ry(y.rbegin(), y.rend());
  const LcsKernel bwd(ry, 2);
  const std::size_t words = fwd.words();
  using Row = std::vector<std::int32_t>;

  // Forward scan of x: state after each short run, row just before the last letter of each long run.
  std::vector<std::uint64_t> v(words);
  std::vector<std::vector<std::uint64_t>> fwd_state(m), bwd_state(m);
  std::vector<Row> prefix_row(m), suffix_row(m);
  fwd.init_state(v);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t p = start[r]; p < start[r + 1]; ++p) {
      if (is_long[r] && p + 1 == start[r + 1]) {
        prefix_row[r].resize(n + 1);
        fwd.prefix_lcs(v, prefix_row[r]);
      }
      fwd.feed(v, x[p]);
    }
    if (is_short[r]) fwd_state[r] = v;
  }
  Row tmp(n + 1);
  fwd.prefix_lcs(v, tmp);
  const std::int32_t base = tmp[n];

  // Backward scan: state and row for the suffix that follows each run.
  bwd.init_state(v);
  for (std::size_t r = m; r-- > 0;) {
    if (is_short[r]) bwd_state[r] = v;
    if (is_long[r]) {
      suffix_row[r].resize(n + 1);
      bwd.prefix_lcs(v, suffix_row[r]);
    }
    for (std::size_t p = start[r]; p < start[r + 1]; ++p) bwd.feed(v, color(r));
  }

  GainProfile out;
  out.base_score = static_cast<double>(base);
  out.min_gain = std::numeric_limits<double>::infinity();
  out.max_gain = -std::numeric_limits<double>::infinity();
  std::int64_t total = 0;
  auto record = [&](std::int32_t best) {
    const std::int32_t d = best - base;
    total += d;
    out.min_gain = std::min(out.min_gain, static_cast<double>(d));
    out.max_gain = std::max(out.max_gain, static_cast<double>(d));
    ++out.outcomes;
  };
  // row_a[b] pairs with row_b[n - b] (prefix side with suffix side).
  auto best_split = [n](const Row& prefix, const Row& suffix_rev) {
    std::int32_t best = 0;
    for (std::size_t b = 0; b <= n; ++b) best = std::max(best, prefix[b] + suffix_rev[n - b]);
    return best;
  };
  const std::size_t first_long = longs.front();
  const std::size_t last_long = longs.back();
  for (std::size_t i : shorts) {
    const Symbol c = color(i);
    if (last_long > i) {
      v = fwd_state[i];
      fwd.feed(v, c);
      for (std::size_t r = i + 1; r <= last_long; ++r) {
        for (std::size_t p = start[r]; p < start[r + 1]; ++p) {
          if (is_long[r] && p + 1 == start[r + 1]) {
            fwd.prefix_lcs(v, tmp);
            record(best_split(tmp, suffix_row[r]));
          }
          fwd.feed(v, x[p]);
        }
      }
    }
    if (first_long < i) {
      v = bwd_state[i];
      bwd.feed(v, c);
      for (std::size_t p = start[i]; p < start[i + 1]; ++p) bwd.feed(v, c);
      for (std::size_t r = i; r-- > first_long;) {
        if (is_long[r]) {
          bwd.prefix_lcs(v, tmp);
          record(best_split(prefix_row[r], tmp));
        }
        for (std::size_t p = start[r]; p < start[r + 1]; ++p) bwd.feed(v, color(r));
      }
    }
  }
  out.expected_gain = static_cast<double>(total) / static_cast<double>(out.outcomes);
  return out;
}

}  // namespace

GainProfile gain_profile(const SequencePair& z, const Transform& t, const Scorer& scorer) {
  const ScoringScheme& scheme = scorer.scheme();
  if (scheme.alphabet_size() != z.x.alphabet().size()) {
    throw Error(ErrorKind::dimension, "scheme does not match the sequence alphabet");
  }
  if (const auto* s = std::get_if<LetterSwap>(&t)) {
    if (z.n() <= kTableGainMaxLength) return swap_gain_fast(z, *s, scheme);
    return gain_profile_enumerated(z, t, scorer);
  }
  const int l = std::get<BlockTransform>(t).l;
  if (scheme.is_lcs()) return block_gain_fast(z, l);
  return gain_profile_enumerated(z, t, scorer);
}

double expected_gain(const SequencePair& z, const Transform& t, const ScoringScheme& scheme) {
  if (scheme.alphabet_size() != z.x.alphabet().size()) {
    throw Error(ErrorKind::dimension, "scheme does not match the sequence alphabet");
  }
  return gain_profile(z, t, Scorer(scheme)).expected_gain;
}

}  // namespace seqfluct
