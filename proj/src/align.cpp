#include "seqfluct/align.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "seqfluct/error.hpp"

namespace seqfluct {

namespace {

void require_comparable(const Sequence& x, const Sequence& y, const ScoringScheme& scheme) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::dimension, "sequences must have equal length");
  }
  if (!(x.alphabet() == y.alphabet())) {
    throw Error(ErrorKind::dimension, "sequences use different alphabets");
  }
  if (scheme.alphabet_size() != x.alphabet().size()) {
    throw Error(ErrorKind::dimension, "scheme does not match the sequence alphabet");
  }
}

constexpr std::size_t kMaxBitParallelAlphabet = 64;

}  // namespace

LcsKernel::LcsKernel(std::span<const Symbol> pattern, std::size_t alphabet_size)
    : m_(pattern.size()),
      words_((pattern.size() + 63) / 64),
      sigma_(alphabet_size),
      masks_(alphabet_size * ((pattern.size() + 63) / 64), 0),
      v_(words_) {
  for (std::size_t i = 0; i < m_; ++i) {
    masks_[pattern[i] * words_ + i / 64] |= std::uint64_t{1} << (i % 64);
  }
}

LcsKernel::LcsKernel(const Sequence& pattern) : LcsKernel(pattern.data(), pattern.alphabet().size()) {}

void LcsKernel::init_state(std::span<std::uint64_t> v) const {
  std::fill(v.begin(), v.end(), ~std::uint64_t{0});
}

void LcsKernel::feed(std::span<std::uint64_t> v, Symbol c) const {
  const std::uint64_t* mask = masks_.data() + static_cast<std::size_t>(c) * words_;
  std::uint64_t carry = 0;
  for (std::size_t w = 0; w < words_; ++w) {
    const std::uint64_t vw = v[w];
    const std::uint64_t u = vw & mask[w];
    std::uint64_t sum = vw + u;
    std::uint64_t c1 = sum < vw;
    sum += carry;
    std::uint64_t c2 = sum < carry;
    carry = c1 | c2;
    v[w] = sum | (vw & ~mask[w]);
  }
}

void LcsKernel::prefix_lcs(std::span<const std::uint64_t> v, std::span<std::int32_t> out) const {
  std::int32_t zeros = 0;
  out[0] = 0;
  for (std::size_t k = 0; k < m_; ++k) {
    zeros += static_cast<std::int32_t>(((v[k / 64] >> (k % 64)) & 1u) ^ 1u);
    out[k + 1] = zeros;
  }
}

std::int64_t LcsKernel::length(std::span<const Symbol> text) const {
  if (m_ == 0) return 0;
  std::fill(v_.begin(), v_.end(), ~std::uint64_t{0});
  for (Symbol c : text) feed(v_, c);
  const std::uint64_t* v = v_.data();
  std::int64_t ones = 0;
  const std::size_t full = m_ / 64;
  for (std::size_t w = 0; w < full; ++w) ones += std::popcount(v[w]);
  if (m_ % 64 != 0) {
    const std::uint64_t keep = (std::uint64_t{1} << (m_ % 64)) - 1;
    ones += std::popcount(v[full] & keep);
  }
  return static_cast<std::int64_t>(m_) - ones;
}

std::int64_t lcs_length_dp(std::span<const Symbol> x, std::span<const Symbol> y) {
  std::vector<std::int64_t> row(y.size() + 1, 0);
  for (std::size_t i = 1; i <= x.size(); ++i) {
    std::int64_t diag = 0;
    for (std::size_t j = 1; j <= y.size(); ++j) {
      const std::int64_t up = row[j];
      std::int64_t best = std::max(up, row[j - 1]);
      if (x[i - 1] == y[j - 1]) best = std::max(best, diag + 1);
      diag = up;
      row[j] = best;
    }
  }
  return row[y.size()];
}

std::int64_t lcs_length(const Sequence& x, const Sequence& y) {
  if (x.size() != y.size()) throw Error(ErrorKind::dimension, "sequences must have equal length");
  if (!(x.alphabet() == y.alphabet())) {
    throw Error(ErrorKind::dimension, "sequences use different alphabets");
  }
  if (x.alphabet().size() > kMaxBitParallelAlphabet) return lcs_length_dp(x.data(), y.data());
  return LcsKernel(y).length(x.data());
}

Scorer::Scorer(ScoringScheme scheme) : scheme_(std::move(scheme)) {
  const std::size_t k = scheme_.alphabet_size();
  gain_.resize(k * k);
  for (std::size_t i = 0; i < k * k; ++i) gain_[i] = scheme_.table()[i] - scheme_.delta();
  if (scheme_.is_integral()) {
    int_gain_.resize(k * k);
    for (std::size_t i = 0; i < k * k; ++i) int_gain_[i] = std::llround(gain_[i]);
  }
}

double Scorer::score(std::span<const Symbol> x, std::span<const Symbol> y) const {
  if (x.size() != y.size()) throw Error(ErrorKind::dimension, "sequences must have equal length");
  const std::size_t n = x.size();
  const std::size_t k = scheme_.alphabet_size();
  if (scheme_.is_lcs() && k <= kMaxBitParallelAlphabet) {
    return static_cast<double>(LcsKernel(y, k).length(x));
  }
  const double base = scheme_.delta() * static_cast<double>(n);
  if (scheme_.is_integral()) {
    irow_.assign(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
      const std::int64_t* g = int_gain_.data() + static_cast<std::size_t>(x[i - 1]) * k;
      std::int64_t diag = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        const std::int64_t up = irow_[j];
        irow_[j] = std::max({up, irow_[j - 1], diag + g[y[j - 1]]});
        diag = up;
      }
    }
    return static_cast<double>(std::llround(base) + irow_[n]);
  }
  drow_.assign(n + 1, 0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    const double* g = gain_.data() + static_cast<std::size_t>(x[i - 1]) * k;
    double diag = 0.0;
    for (std::size_t j = 1; j <= n; ++j) {
      const double up = drow_[j];
      drow_[j] = std::max({up, drow_[j - 1], diag + g[y[j - 1]]});
      diag = up;
    }
  }
  return base + drow_[n];
}

AlignmentScore optimal_score(const Sequence& x, const Sequence& y, const ScoringScheme& scheme) {
  require_comparable(x, y, scheme);
  Scorer scorer(scheme);
  return {scorer.score(x.data(), y.data()), x.size()};
}

AlignmentScore optimal_score(const SequencePair& z, const ScoringScheme& scheme) {
  return optimal_score(z.x, z.y, scheme);
}

AlignmentScore brute_force_score(const Sequence& x, const Sequence& y, const ScoringScheme& scheme) {
  require_comparable(x, y, scheme);
  const std::size_t n = x.size();
  if (n > kBruteForceMaxLength) {
    throw Error(ErrorKind::guard, "brute_force_score refuses n > 12");
  }
  // Index subsets grouped by cardinality; each subset lists its positions in order.
  std::vector<std::vector<std::vector<std::size_t>>> by_size(n + 1);
  for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << n); ++mask) {
    std::vector<std::size_t> positions;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::uint32_t{1} << i)) positions.push_back(i);
    }
    by_size[positions.size()].push_back(std::move(positions));
  }
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= n; ++k) {
    const double gaps = scheme.delta() * static_cast<double>(n - k);
    for (const auto& rho : by_size[k]) {
      for (const auto& tau : by_size[k]) {
        double total = 0.0;
        for (std::size_t i = 0; i < k; ++i) total += scheme.score(x[rho[i]], y[tau[i]]);
        best = std::max(best, total + gaps);
      }
    }
  }
  return {best, n};
}

}  // namespace seqfluct
