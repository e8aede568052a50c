#include <doctest.h>

#include <functional>
#include <random>

#include "seqfluct/core.hpp"
#include "seqfluct/error.hpp"

using namespace seqfluct;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::invariant;
}

}  // namespace

TEST_SUITE("core") {
  TEST_CASE("lcs scheme is the identity table") {
    const auto bin = binary_alphabet();
    const ScoringScheme s2 = make_lcs_scheme(*bin);
    CHECK(s2.alphabet_size() == 2);
    CHECK(s2.table() == std::vector<double>{1, 0, 0, 1});
    CHECK(s2.delta() == 0.0);
    CHECK(s2.is_lcs());
    CHECK(s2.is_integral());

    const ScoringScheme s3 = make_lcs_scheme(*make_alphabet("abc"));
    CHECK(s3.table() == std::vector<double>{1, 0, 0, 0, 1, 0, 0, 0, 1});
    CHECK(s3.is_lcs());
  }

  TEST_CASE("scheme validation") {
    CHECK(kind_of([] { ScoringScheme(2, {1, -0.5, 0, 1}, 0.0); }) == ErrorKind::validation);
    CHECK(kind_of([] { ScoringScheme(2, {1, 0, 0, 1}, 1.5); }) == ErrorKind::validation);
    CHECK(kind_of([] { ScoringScheme(2, {1, 0, 0}, 0.0); }) == ErrorKind::dimension);
    // delta may be negative or positive up to a_max
    CHECK_NOTHROW(ScoringScheme(2, {1, 0, 0, 1}, -1.0));
    CHECK_NOTHROW(ScoringScheme(2, {1, 0, 0, 1}, 1.0));
    const ScoringScheme s(2, {2, 0.5, 0.5, 2}, 0.25);
    CHECK(s.a_max() == 2.0);
    CHECK_FALSE(s.is_integral());
    CHECK_FALSE(s.is_lcs());
  }

  TEST_CASE("alphabet and sequence parsing") {
    CHECK(kind_of([] { make_alphabet("aa"); }) == ErrorKind::validation);
    CHECK(kind_of([] { make_alphabet("a"); }) == ErrorKind::validation);
    const auto abc = make_alphabet("abc");
    const Sequence s = Sequence::parse(abc, "cab");
    CHECK(s.str() == "cab");
    CHECK(s[0] == 2);
    CHECK(s.count(0) == 1);
    CHECK(kind_of([&] { Sequence::parse(abc, "abd"); }) == ErrorKind::validation);
    CHECK(kind_of([&] { SequencePair(Sequence::parse(abc, "ab"), Sequence::parse(abc, "a")); }) ==
          ErrorKind::dimension);
  }

  TEST_CASE("symbol distribution validation") {
    CHECK(kind_of([] { SymbolDist({0.5, 0.6}); }) == ErrorKind::validation);
    CHECK(kind_of([] { SymbolDist({1.0, 0.0}); }) == ErrorKind::validation);
    CHECK(SymbolDist::uniform(4)[3] == doctest::Approx(0.25));
  }

  TEST_CASE("letter-swap condition examples") {
    const ScoringScheme s(2, {2, 1, 1, 2}, 0.0);
    CHECK(check_mimi(s, SymbolDist({0.3, 0.7}), 0, 1));
    // the sum vanishes exactly when P(a) = P(b)
    CHECK_FALSE(check_mimi(s, SymbolDist({0.5, 0.5}), 0, 1));
    CHECK(mimi_margin(s, SymbolDist({0.5, 0.5}), 0, 1) == 0.0);
    const ScoringScheme flat(3, std::vector<double>(9, 1.0), 0.0);
    CHECK_FALSE(check_mimi(flat, SymbolDist({0.2, 0.3, 0.5}), 0, 1));
    CHECK_FALSE(check_mimi(flat, SymbolDist({0.2, 0.3, 0.5}), 1, 0));
    CHECK(kind_of([&] { check_mimi(s, SymbolDist({0.2, 0.3, 0.5}), 0, 1); }) == ErrorKind::dimension);
    CHECK(kind_of([&] { check_mimi(s, SymbolDist({0.3, 0.7}), 1, 1); }) == ErrorKind::validation);
  }

  TEST_CASE("letter-swap condition is antisymmetric") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    int violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t k = 2 + trial % 3;
      std::vector<double> table(k * k), p(k);
      for (double& t : table) t = std::floor(unif(gen) * 4);
      double total = 0;
      for (double& x : p) total += (x = 0.05 + unif(gen));
      for (double& x : p) x /= total;
      p.back() = 1.0;
      for (std::size_t i = 0; i + 1 < k; ++i) p.back() -= p[i];
      const ScoringScheme s(k, table, 0.0);
      const SymbolDist d(p);
      const double m = mimi_margin(s, d, 0, 1);
      const bool ab = check_mimi(s, d, 0, 1), ba = check_mimi(s, d, 1, 0);
      if (ab && ba) ++violations;
      if (m != 0.0 && ab == ba) ++violations;
      CHECK(mimi_margin(s, d, 1, 0) == doctest::Approx(-m));
    }
    CHECK(violations == 0);
  }

  TEST_CASE("error kinds map to exit codes") {
    CHECK(exit_code(ErrorKind::validation) == 2);
    CHECK(exit_code(ErrorKind::dimension) == 2);
    CHECK(exit_code(ErrorKind::invariant) == 3);
    CHECK(exit_code(ErrorKind::guard) == 4);
  }
}
