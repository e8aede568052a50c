#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace seqfluct {

/// Dense symbol index into an Alphabet.
using Symbol = std::uint8_t;

/// Ordered set of printable one-character symbols. Sequences store indices.
class Alphabet {
 public:
  explicit Alphabet(std::string symbols);

  std::size_t size() const noexcept { return symbols_.size(); }
  char name(Symbol s) const { return symbols_.at(s); }
  bool contains(char c) const noexcept;
  Symbol index(char c) const;
  const std::string& symbols() const noexcept { return symbols_; }

  friend bool operator==(const Alphabet& a, const Alphabet& b) noexcept {
    return a.symbols_ == b.symbols_;
  }

 private:
  std::string symbols_;
  std::array<std::int16_t, 256> lookup_{};
};

using AlphabetPtr = std::shared_ptr<const Alphabet>;

AlphabetPtr make_alphabet(std::string symbols);

/// The alphabet {0, 1} used by the block model.
AlphabetPtr binary_alphabet();

class Sequence {
 public:
  Sequence(AlphabetPtr alphabet, std::vector<Symbol> data);

  /// One character per symbol.
  static Sequence parse(AlphabetPtr alphabet, std::string_view text);

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  Symbol operator[](std::size_t i) const noexcept { return data_[i]; }
  std::span<const Symbol> data() const noexcept { return data_; }
  const Alphabet& alphabet() const noexcept { return *alphabet_; }
  const AlphabetPtr& alphabet_ptr() const noexcept { return alphabet_; }

  std::size_t count(Symbol s) const noexcept;
  std::string str() const;

  friend bool operator==(const Sequence& a, const Sequence& b) noexcept {
    return a.data_ == b.data_ && *a.alphabet_ == *b.alphabet_;
  }
  friend std::strong_ordering operator<=>(const Sequence& a, const Sequence& b) noexcept {
    return a.data_ <=> b.data_;
  }

 private:
  AlphabetPtr alphabet_;
  std::vector<Symbol> data_;
};

/// Z = (X, Y), two strings of the same length over the same alphabet.
struct SequencePair {
  Sequence x;
  Sequence y;

  SequencePair(Sequence x_, Sequence y_);

  std::size_t n() const noexcept { return x.size(); }
  std::string str() const { return x.str() + "|" + y.str(); }

  friend bool operator==(const SequencePair&, const SequencePair&) = default;
  friend std::strong_ordering operator<=>(const SequencePair& a, const SequencePair& b) noexcept {
    if (auto c = a.x <=> b.x; c != 0) return c;
    return a.y <=> b.y;
  }
};

/// Pairwise score table S over an alphabet plus the gap price delta.
///
/// Every entry must be nonnegative and delta may not exceed the largest
/// table entry. Immutable after construction.
class ScoringScheme {
 public:
  ScoringScheme(std::size_t alphabet_size, std::vector<double> table, double delta);

  std::size_t alphabet_size() const noexcept { return size_; }
  double score(Symbol a, Symbol b) const noexcept { return table_[a * size_ + b]; }
  double delta() const noexcept { return delta_; }
  double a_max() const noexcept { return a_max_; }
  const std::vector<double>& table() const noexcept { return table_; }

  /// True iff the scheme is exactly the 0/1 identity table with delta = 0.
  bool is_lcs() const noexcept { return is_lcs_; }
  /// True iff every table entry and delta are integers.
  bool is_integral() const noexcept { return is_integral_; }

  friend bool operator==(const ScoringScheme&, const ScoringScheme&) = default;

 private:
  std::size_t size_;
  std::vector<double> table_;
  double delta_;
  double a_max_;
  bool is_lcs_;
  bool is_integral_;
};

ScoringScheme make_lcs_scheme(const Alphabet& alphabet);

/// Letter probabilities; all strictly positive, summing to one within 1e-12.
class SymbolDist {
 public:
  explicit SymbolDist(std::vector<double> p);

  std::size_t size() const noexcept { return p_.size(); }
  double operator[](std::size_t i) const noexcept { return p_[i]; }
  const std::vector<double>& probs() const noexcept { return p_; }

  static SymbolDist uniform(std::size_t k);

 private:
  std::vector<double> p_;
};

/// sum_c P(c) (S(b,c) - S(a,c)); its sign decides the letter-swap condition.
double mimi_margin(const ScoringScheme& scheme, const SymbolDist& dist, Symbol a, Symbol b);

/// Strict positivity of mimi_margin. Ties are false.
bool check_mimi(const ScoringScheme& scheme, const SymbolDist& dist, Symbol a, Symbol b);

}  // namespace seqfluct
