#include <doctest.h>

#include <random>

#include "seqfluct/align.hpp"
#include "seqfluct/error.hpp"
#include "support/oracles.hpp"

using namespace seqfluct;

namespace {

Sequence random_sequence(const AlphabetPtr& alphabet, std::size_t n, std::mt19937_64& gen) {
  std::vector<Symbol> data(n);
  for (auto& s : data) s = static_cast<Symbol>(gen() % alphabet->size());
  return Sequence(alphabet, data);
}

std::vector<int> as_ints(const Sequence& s) { return {s.data().begin(), s.data().end()}; }

oracles::Table as_table(const ScoringScheme& s) {
  const std::size_t k = s.alphabet_size();
  oracles::Table t(k, std::vector<double>(k));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) t[i][j] = s.score(static_cast<Symbol>(i), static_cast<Symbol>(j));
  }
  return t;
}

}  // namespace

TEST_SUITE("align") {
  TEST_CASE("worked pair of length 15") {
    const auto bin = binary_alphabet();
    const Sequence x = Sequence::parse(bin, "100101100001101");
    const Sequence y = Sequence::parse(bin, "111000010101110");
    const int expected = oracles::lcs_memo(as_ints(x), as_ints(y));
    // 11100001101 is common to both, one longer than the quoted 10
    CHECK(expected == 11);
    CHECK(lcs_length(x, y) == expected);
    CHECK(optimal_score(x, y, make_lcs_scheme(*bin)).value == expected);
  }

  TEST_CASE("identical strings align fully") {
    std::mt19937_64 gen(3);
    const auto abc = make_alphabet("abc");
    for (std::size_t n : {1u, 7u, 64u, 65u, 200u}) {
      const Sequence x = random_sequence(abc, n, gen);
      CHECK(optimal_score(x, x, make_lcs_scheme(*abc)).value == static_cast<double>(n));
    }
  }

  TEST_CASE("small brute-force cases") {
    const auto bin = binary_alphabet();
    const ScoringScheme lcs = make_lcs_scheme(*bin);
    const Sequence empty(bin, {});
    CHECK(brute_force_score(empty, empty, lcs).value == 0.0);
    const Sequence x = Sequence::parse(bin, "01"), y = Sequence::parse(bin, "10");
    const double expected = oracles::alignment_score_by_subsets({0, 1}, {1, 0}, as_table(lcs), 0.0);
    CHECK(expected == 1.0);
    CHECK(brute_force_score(x, y, lcs).value == expected);
    // complements: 0101 vs 1010
    const Sequence a = Sequence::parse(bin, "0101"), b = Sequence::parse(bin, "1010");
    CHECK(oracles::alignment_score_by_subsets(as_ints(a), as_ints(b), as_table(lcs), 0.0) == 3.0);
    CHECK(lcs_length(a, b) == 3);
  }

  TEST_CASE("brute force refuses long inputs and checks shapes") {
    const auto bin = binary_alphabet();
    const ScoringScheme lcs = make_lcs_scheme(*bin);
    const Sequence long_x(bin, std::vector<Symbol>(13, 0));
    try {
      brute_force_score(long_x, long_x, lcs);
      FAIL("expected guard");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::guard);
    }
    const Sequence a(bin, {0, 1}), b(bin, {0});
    CHECK_THROWS_AS(optimal_score(a, b, lcs), Error);
    const auto abc = make_alphabet("abc");
    CHECK_THROWS_AS(optimal_score(Sequence(abc, {0, 1}), Sequence(abc, {0, 1}), lcs), Error);
  }

  TEST_CASE("DP matches subset enumeration on random small pairs") {
    std::mt19937_64 gen(11);
    const auto bin = binary_alphabet();
    const std::vector<ScoringScheme> schemes = {
        ScoringScheme(2, {1, 0, 0, 1}, -1.0), ScoringScheme(2, {2, 1, 1, 3}, 0.0),
        ScoringScheme(2, {1, 0.25, 0.25, 1}, 0.5), make_lcs_scheme(*bin)};
    int mismatches = 0;
    for (int trial = 0; trial < 400; ++trial) {
      const std::size_t n = 1 + gen() % 8;
      const Sequence x = random_sequence(bin, n, gen), y = random_sequence(bin, n, gen);
      for (const auto& s : schemes) {
        const double expected = oracles::alignment_score_by_subsets(as_ints(x), as_ints(y), as_table(s), s.delta());
        if (std::abs(optimal_score(x, y, s).value - expected) > 1e-9) ++mismatches;
        if (std::abs(brute_force_score(x, y, s).value - expected) > 1e-9) ++mismatches;
      }
    }
    CHECK(mismatches == 0);
  }

  TEST_CASE("ternary pairs up to length 10 match brute force") {
    std::mt19937_64 gen(12);
    const auto abc = make_alphabet("abc");
    const ScoringScheme s(3, {3, 1, 0, 1, 2, 1, 0, 1, 3}, 0.5);
    int mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t n = 1 + gen() % 10;
      const Sequence x = random_sequence(abc, n, gen), y = random_sequence(abc, n, gen);
      if (std::abs(optimal_score(x, y, s).value - brute_force_score(x, y, s).value) > 1e-9) ++mismatches;
    }
    CHECK(mismatches == 0);
  }

  TEST_CASE("bit-parallel LCS matches memoized recursion across word boundaries") {
    std::mt19937_64 gen(5);
    for (const char* letters : {"01", "abcd"}) {
      const auto alphabet = make_alphabet(letters);
      for (std::size_t n : {1u, 63u, 64u, 65u, 127u, 128u, 129u, 300u}) {
        const Sequence x = random_sequence(alphabet, n, gen), y = random_sequence(alphabet, n, gen);
        const int expected = oracles::lcs_memo(as_ints(x), as_ints(y));
        CHECK(lcs_length(x, y) == expected);
        CHECK(lcs_length_dp(x.data(), y.data()) == expected);
        CHECK(LcsKernel(y).length(x.data()) == expected);
      }
    }
  }

  TEST_CASE("kernel prefix rows give LCS against every pattern prefix") {
    std::mt19937_64 gen(6);
    const auto bin = binary_alphabet();
    const Sequence x = random_sequence(bin, 90, gen), y = random_sequence(bin, 130, gen);
    const LcsKernel k(y);
    std::vector<std::uint64_t> v(k.words());
    k.init_state(v);
    std::vector<std::int32_t> row(y.size() + 1);
    for (std::size_t i = 0; i < x.size(); ++i) {
      k.feed(v, x[i]);
      if (i % 17 != 0) continue;
      k.prefix_lcs(v, row);
      std::vector<int> xs(x.data().begin(), x.data().begin() + static_cast<std::ptrdiff_t>(i + 1));
      for (std::size_t b : {0u, 1u, 40u, 64u, 65u, 130u}) {
        std::vector<int> ys(y.data().begin(), y.data().begin() + static_cast<std::ptrdiff_t>(b));
        CHECK(row[b] == oracles::lcs_memo(xs, ys));
      }
    }
  }

  TEST_CASE("Scorer paths agree") {
    std::mt19937_64 gen(8);
    const auto abc = make_alphabet("abc");
    const ScoringScheme integral(3, {2, 0, 1, 0, 2, 0, 1, 0, 2}, 1.0);
    const ScoringScheme real(3, {2, 0, 1, 0, 2, 0, 1, 0, 2.0000001}, 1.0);
    const Scorer si(integral), sr(real);
    for (int trial = 0; trial < 50; ++trial) {
      const Sequence x = random_sequence(abc, 40, gen), y = random_sequence(abc, 40, gen);
      const SequencePair z(x, y);
      CHECK(si.score(z) == optimal_score(z, integral).value);
      CHECK(sr.score(z) == doctest::Approx(si.score(z)).epsilon(1e-5));
    }
  }

  TEST_CASE("single-letter edits cost at most a_max") {
    std::mt19937_64 gen(9);
    const auto abc = make_alphabet("abc");
    const ScoringScheme s(3, {3, 1, 0, 1, 2, 1, 0, 1, 3}, 0.5);
    int violations = 0;
    for (int trial = 0; trial < 500; ++trial) {
      const std::size_t n = 1 + gen() % 30;
      const Sequence x = random_sequence(abc, n, gen), y = random_sequence(abc, n, gen);
      std::vector<Symbol> edited(x.data().begin(), x.data().end());
      edited[gen() % n] = static_cast<Symbol>(gen() % 3);
      const double before = optimal_score(x, y, s).value;
      const double after = optimal_score(Sequence(abc, edited), y, s).value;
      if (after < before - s.a_max() - 1e-9) ++violations;
    }
    CHECK(violations == 0);
  }

  TEST_CASE("LCS is monotone under common appends and superadditive at splits") {
    std::mt19937_64 gen(10);
    const auto bin = binary_alphabet();
    int violations = 0;
    for (int trial = 0; trial < 500; ++trial) {
      const std::size_t n = 2 + gen() % 80;
      const Sequence x = random_sequence(bin, n, gen), y = random_sequence(bin, n, gen);
      const auto whole = lcs_length(x, y);
      std::vector<Symbol> xa(x.data().begin(), x.data().end()), ya(y.data().begin(), y.data().end());
      const Symbol c = static_cast<Symbol>(gen() % 2);
      xa.push_back(c);
      ya.push_back(c);
      if (lcs_length(Sequence(bin, xa), Sequence(bin, ya)) < whole) ++violations;
      const std::size_t m = 1 + gen() % (n - 1);
      auto cut = [&](const Sequence& s, std::size_t lo, std::size_t hi) {
        return Sequence(bin, std::vector<Symbol>(s.data().begin() + static_cast<std::ptrdiff_t>(lo),
                                                 s.data().begin() + static_cast<std::ptrdiff_t>(hi)));
      };
      if (whole < lcs_length(cut(x, 0, m), cut(y, 0, m)) + lcs_length(cut(x, m, n), cut(y, m, n))) ++violations;
    }
    CHECK(violations == 0);
  }
}
