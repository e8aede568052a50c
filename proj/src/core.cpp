#include "seqfluct/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seqfluct/error.hpp"

namespace seqfluct {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::validation: return "validation";
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::malformed: return "malformed";
    case ErrorKind::infeasible: return "infeasible";
    case ErrorKind::inapplicable: return "inapplicable";
    case ErrorKind::guard: return "guard";
    case ErrorKind::invariant: return "invariant";
  }
  return "unknown";
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invariant: return 3;
    case ErrorKind::guard: return 4;
    default: return 2;
  }
}

Alphabet::Alphabet(std::string symbols) : symbols_(std::move(symbols)) {
  if (symbols_.size() < 2) {
    throw Error(ErrorKind::validation, "alphabet needs at least 2 symbols");
  }
  if (symbols_.size() > 255) {
    throw Error(ErrorKind::validation, "alphabet has more than 255 symbols");
  }
  lookup_.fill(-1);
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    auto slot = static_cast<unsigned char>(symbols_[i]);
    if (lookup_[slot] >= 0) {
      throw Error(ErrorKind::validation,
                  std::string("duplicate alphabet symbol '") + symbols_[i] + "'");
    }
    lookup_[slot] = static_cast<std::int16_t>(i);
  }
}

bool Alphabet::contains(char c) const noexcept {
  return lookup_[static_cast<unsigned char>(c)] >= 0;
}

Symbol Alphabet::index(char c) const {
  auto i = lookup_[static_cast<unsigned char>(c)];
  if (i < 0) {
    throw Error(ErrorKind::validation,
                std::string("symbol '") + c + "' is not in alphabet \"" + symbols_ + "\"");
  }
  return static_cast<Symbol>(i);
}

AlphabetPtr make_alphabet(std::string symbols) {
  return std::make_shared<const Alphabet>(std::move(symbols));
}

AlphabetPtr binary_alphabet() {
  static const AlphabetPtr kBinary = make_alphabet("01");
  return kBinary;
}

Sequence::Sequence(AlphabetPtr alphabet, std::vector<Symbol> data)
    : alphabet_(std::move(alphabet)), data_(std::move(data)) {
  if (!alphabet_) throw Error(ErrorKind::validation, "sequence without alphabet");
  for (Symbol s : data_) {
    if (s >= alphabet_->size()) {
      throw Error(ErrorKind::validation, "symbol index out of range for alphabet");
    }
  }
}

Sequence Sequence::parse(AlphabetPtr alphabet, std::string_view text) {
  std::vector<Symbol> data;
  data.reserve(text.size());
  for (char c : text) data.push_back(alphabet->index(c));
  return Sequence(std::move(alphabet), std::move(data));
}

std::size_t Sequence::count(Symbol s) const noexcept {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), s));
}

std::string Sequence::str() const {
  std::string out;
  out.reserve(data_.size());
  for (Symbol s : data_) out.push_back(alphabet_->name(s));
  return out;
}

SequencePair::SequencePair(Sequence x_, Sequence y_) : x(std::move(x_)), y(std::move(y_)) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::dimension, "sequence pair has unequal lengths");
  }
  if (!(x.alphabet() == y.alphabet())) {
    throw Error(ErrorKind::dimension, "sequence pair uses different alphabets");
  }
}

ScoringScheme::ScoringScheme(std::size_t alphabet_size, std::vector<double> table, double delta)
    : size_(alphabet_size), table_(std::move(table)), delta_(delta) {
  if (size_ < 2) throw Error(ErrorKind::validation, "score table needs at least 2 symbols");
  if (table_.size() != size_ * size_) {
    throw Error(ErrorKind::dimension, "score table is not square over the alphabet");
  }
  if (!std::isfinite(delta_)) throw Error(ErrorKind::validation, "gap_price must be finite");
  for (double s : table_) {
    if (!std::isfinite(s) || s < 0.0) {
      throw Error(ErrorKind::validation, "score_table entries must be finite and >= 0");
    }
  }
  a_max_ = *std::max_element(table_.begin(), table_.end());
  if (delta_ > a_max_) {
    throw Error(ErrorKind::validation, "gap_price exceeds the largest score table entry");
  }
  is_lcs_ = delta_ == 0.0;
  for (std::size_t a = 0; a < size_ && is_lcs_; ++a) {
    for (std::size_t b = 0; b < size_; ++b) {
      if (table_[a * size_ + b] != (a == b ? 1.0 : 0.0)) {
        is_lcs_ = false;
        break;
      }
    }
  }
  is_integral_ = std::trunc(delta_) == delta_ && std::abs(delta_) < 1e15;
  for (double s : table_) {
    if (std::trunc(s) != s || s >= 1e15) is_integral_ = false;
  }
}

ScoringScheme make_lcs_scheme(const Alphabet& alphabet) {
  const std::size_t k = alphabet.size();
  std::vector<double> table(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) table[i * k + i] = 1.0;
  return ScoringScheme(k, std::move(table), 0.0);
}

SymbolDist::SymbolDist(std::vector<double> p) : p_(std::move(p)) {
  if (p_.size() < 2) throw Error(ErrorKind::validation, "probs needs at least 2 entries");
  for (double x : p_) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw Error(ErrorKind::validation, "probs entries must be strictly positive");
    }
  }
  double total = std::accumulate(p_.begin(), p_.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorKind::validation, "probs must sum to 1");
  }
}

SymbolDist SymbolDist::uniform(std::size_t k) {
  return SymbolDist(std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

double mimi_margin(const ScoringScheme& scheme, const SymbolDist& dist, Symbol a, Symbol b) {
  if (scheme.alphabet_size() != dist.size()) {
    throw Error(ErrorKind::dimension, "scheme and distribution alphabet sizes differ");
  }
  if (a >= dist.size() || b >= dist.size()) {
    throw Error(ErrorKind::validation, "letter outside the alphabet");
  }
  if (a == b) throw Error(ErrorKind::validation, "letters a and b must differ");
  double sum = 0.0;
  for (std::size_t c = 0; c < dist.size(); ++c) {
    auto cs = static_cast<Symbol>(c);
    sum += dist[c] * (scheme.score(b, cs) - scheme.score(a, cs));
  }
  return sum;
}

bool check_mimi(const ScoringScheme& scheme, const SymbolDist& dist, Symbol a, Symbol b) {
  return mimi_margin(scheme, dist, a, b) > 0.0;
}

}  // namespace seqfluct
