#include <doctest.h>

#include <random>

#include "seqfluct/align.hpp"
#include "seqfluct/error.hpp"
#include "seqfluct/oracle.hpp"
#include "support/oracles.hpp"

using namespace seqfluct;

namespace {

const BlockModelParams kThirds(3, 1.0 / 3, 1.0 / 3, 1.0 / 3);

Model ternary_iid() { return IidModel(make_alphabet("abc"), SymbolDist({0.2, 0.3, 0.5}), 0, 1); }

// Random law on a set of integers plus a random increasing map with steps >= step.
struct LawAndMap {
  IntLaw law;
  std::map<std::int64_t, double> f;
};

LawAndMap random_instance(std::mt19937_64& gen, int max_gap, double step) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int points = 2 + static_cast<int>(gen() % 12);
  std::map<std::int64_t, double> weights;
  std::int64_t z = static_cast<std::int64_t>(gen() % 20) - 10;
  LawAndMap out;
  double value = unif(gen) * 5;
  for (int i = 0; i < points; ++i) {
    weights[z] = 0.01 + unif(gen);
    out.f[z] = value;
    z += 1 + static_cast<std::int64_t>(gen() % static_cast<unsigned>(max_gap));
    value += step + unif(gen) * 3 * (gen() % 2);
  }
  out.law = make_law(weights);
  return out;
}

}  // namespace

TEST_SUITE("oracle") {
  TEST_CASE("total variation examples") {
    const IntLaw p = make_law(std::map<std::int64_t, double>{{0, 0.5}, {1, 0.5}});
    const IntLaw q = make_law(std::map<std::int64_t, double>{{0, 1.0}});
    const IntLaw r = make_law(std::map<std::int64_t, double>{{5, 1.0}});
    CHECK(tv_distance(p, p) == 0.0);
    CHECK(tv_distance(q, r) == 1.0);
    CHECK(tv_distance(p, q) == doctest::Approx(0.5));
  }

  TEST_CASE("binary uniform model at n = 2") {
    const Model m = IidModel(binary_alphabet(), SymbolDist::uniform(2), 0, 1);
    const PairLaw law = enumerate_model(m, 2);
    CHECK(law.size() == 16);
    for (double p : law.probs) CHECK(p == doctest::Approx(1.0 / 16));
  }

  TEST_CASE("block strings carry the full mass") {
    for (std::size_t n : {1u, 5u, 13u}) {
      double total = 0.0;
      for (const auto& [x, p] : enumerate_block_strings(kThirds, n)) total += p;
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(enumeration_size(BlockModel{kThirds}, 13) == doctest::Approx(176.0 * 176.0));
  }

  TEST_CASE("enumeration guard") {
    try {
      enumerate_model(ternary_iid(), 20);
      FAIL("expected guard");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::guard);
    }
  }

  TEST_CASE("conditional laws match their closed forms") {
    for (const Model& m : {ternary_iid(), Model(BlockModel{kThirds})}) {
      const std::size_t n = std::holds_alternative<IidModel>(m) ? 3 : 9;
      for (const UVStats& uv : support_points(m, n)) {
        const PairLaw direct = conditional_law(m, n, uv);
        PairLaw closed = conditional_law_closed_form(m, n, uv);
        CHECK(closed.total() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(tv_distance(direct, closed) < 1e-12);
      }
    }
    try {
      conditional_law(ternary_iid(), 3, UVStats::iid(4, 2));
      FAIL("expected infeasible");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::infeasible);
    }
  }

  TEST_CASE("uv pmf agrees with enumeration") {
    for (const Model& m : {ternary_iid(), Model(BlockModel{BlockModelParams(2, 0.2, 0.3, 0.5)})}) {
      const std::size_t n = 3;
      std::map<UVStats, double> mass;
      for_each_outcome(m, n, [&](const SequencePair& z, double p) { mass[model_uv(m, z)] += p; });
      for (const auto& [uv, p] : mass) {
        CHECK(uv_pmf(m, n, uv) == doctest::Approx(p).epsilon(1e-12));
        CHECK(log_uv_pmf(m, n, uv) == doctest::Approx(std::log(p)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("a single-point fiber pushes forward to the outcome set") {
    const Model m = ternary_iid();
    // (u, v) = (0, 1) at n = 1: the lone a is in x or in y
    const UVStats uv = UVStats::iid(0, 1);
    const PairLaw law = conditional_law(m, 1, uv);
    for (std::size_t i = 0; i < law.size(); ++i) {
      const PairLaw point{{law.support[i]}, {1.0}};
      const PairLaw pushed = pushforward_law(point, make_letter_swap(0, 1));
      PairLaw direct;
      for (const auto& item : outcomes(law.support[i], make_letter_swap(0, 1)).items) {
        direct.support.push_back(item.z);
        direct.probs.push_back(item.prob);
      }
      CHECK(tv_distance(pushed, direct) == 0.0);
    }
  }

  TEST_CASE("moments agree with a direct enumeration and split exactly") {
    const Model m = IidModel(binary_alphabet(), SymbolDist({0.3, 0.7}), 0, 1);
    for (std::size_t n : {1u, 2u, 3u, 4u}) {
      double mean = 0.0, second = 0.0;
      for (unsigned code = 0; code < (1u << (2 * n)); ++code) {
        std::vector<int> x(n), y(n);
        double p = 1.0;
        for (std::size_t i = 0; i < n; ++i) p *= (x[i] = (code >> i) & 1u) ? 0.7 : 0.3;
        for (std::size_t i = 0; i < n; ++i) p *= (y[i] = (code >> (n + i)) & 1u) ? 0.7 : 0.3;
        const double l = oracles::lcs_memo(x, y);
        mean += p * l;
        second += p * l * l;
      }
      const ExactMoments em = exact_moments(m, n, make_lcs_scheme(*binary_alphabet()));
      CHECK(em.mean == doctest::Approx(mean).epsilon(1e-12));
      CHECK(em.variance == doctest::Approx(second - mean * mean).epsilon(1e-10));
      CHECK(std::abs(em.within + em.between - em.variance) <= 1e-12 * std::max(1.0, em.variance));
    }
  }

  TEST_CASE("fibers: span 4 in the block model, full range in the iid model") {
    for (std::size_t n = 2; n <= 40; ++n) {
      // independent list of feasible (t, r) -> u from the block-count equation
      std::map<std::pair<std::int64_t, std::int64_t>, std::set<std::int64_t>> expected;
      for (std::int64_t b1 = 0; 2 * b1 <= static_cast<std::int64_t>(n); ++b1) {
        for (std::int64_t b2 = 0; 2 * b1 + 3 * b2 <= static_cast<std::int64_t>(n); ++b2) {
          for (std::int64_t b3 = 0; 2 * b1 + 3 * b2 + 4 * b3 <= static_cast<std::int64_t>(n); ++b3) {
            const std::int64_t r = static_cast<std::int64_t>(n) - 2 * b1 - 3 * b2 - 4 * b3;
            if (r >= 1 && r <= 4) expected[{b1 + b2 + b3, r}].insert(b2 - b1 - b3);
          }
        }
      }
      for (const auto& [v, us] : expected) {
        const auto got = fiber(BlockModel{kThirds}, n, {v.first, v.second});
        CHECK(std::vector<std::int64_t>(us.begin(), us.end()) == got);
        for (std::size_t i = 1; i < got.size(); ++i) CHECK(got[i] - got[i - 1] == 4);
      }
    }
    for (std::size_t n = 1; n <= 6; ++n) {
      for (std::int64_t v = 0; v <= static_cast<std::int64_t>(2 * n); ++v) {
        const auto got = fiber(ternary_iid(), n, {v, 0});
        REQUIRE(got.size() == static_cast<std::size_t>(v + 1));
        for (std::int64_t u = 0; u <= v; ++u) CHECK(got[static_cast<std::size_t>(u)] == u);
      }
    }
  }

  TEST_CASE("ratio of neighbouring block point masses") {
    std::mt19937_64 gen(4);
    const BlockModelParams params(3, 0.2, 0.45, 0.35);
    const double q_ratio = 0.45 * 0.45 / (0.2 * 0.35);
    int checked = 0;
    while (checked < 300) {
      const std::int64_t n = 20 + static_cast<std::int64_t>(gen() % 180);
      const std::int64_t t = n / 3 - static_cast<std::int64_t>(gen() % 6);
      const std::int64_t r = 1 + static_cast<std::int64_t>(gen() % 4);
      const std::int64_t u = -t + static_cast<std::int64_t>(gen() % static_cast<std::uint64_t>(2 * t + 1));
      const auto b = try_tur_to_blocks(t, u, r, n, 3);
      if (!b || !try_tur_to_blocks(t, u + 4, r, n, 3)) continue;
      ++checked;
      const oracles::BigRational exact(oracles::multinomial({b->b1 - 1, b->b2 + 2, b->b3 - 1}),
                                       oracles::multinomial({b->b1, b->b2, b->b3}));
      const double closed = static_cast<double>(b->b1 * b->b3) / static_cast<double>((b->b2 + 1) * (b->b2 + 2));
      CHECK(static_cast<double>(exact) == doctest::Approx(closed).epsilon(1e-15));
      const double lib = tur_pmf(t, u + 4, r, params, static_cast<std::size_t>(n)) /
                         tur_pmf(t, u, r, params, static_cast<std::size_t>(n));
      CHECK(lib == doctest::Approx(closed * q_ratio).epsilon(1e-12));
    }
  }

  TEST_CASE("local limit diagnostics stay bounded away from zero") {
    double lo = 1e9, hi = 0.0;
    for (std::int64_t m : {100, 1000, 10000, 100000}) {
      const double b = binomial_lclt_floor(m, 0.3, 1.0);
      const double t = trinomial_lclt_floor(m, {0.2, 0.5, 0.3}, 1.0);
      CHECK(b > 0.0);
      CHECK(t > 0.0);
      lo = std::min(lo, b);
      hi = std::max(hi, b);
      CHECK(binomial_window_variance(m, 0.3, 1.0) > 0.0);
      CHECK(log_binomial_pmf(m, m / 3, 0.3) == doctest::Approx(std::log(oracles::binomial_pmf(m, m / 3, 0.3))).epsilon(1e-9));
    }
    CHECK(hi / lo < 2.0);
    const double k = quotient_window_k(kThirds, 1000, 1.0);
    CHECK(k > 0.0);
    CHECK(k < 100.0);
  }

  TEST_CASE("integer-valued laws: monotone maps with steps >= c scale the variance by at least c^2") {
    std::mt19937_64 gen(1);
    int violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const double c = 0.1 + (gen() % 100) / 25.0;
      const LawAndMap inst = random_instance(gen, 1, c);
      std::vector<double> fv;
      for (auto z : inst.law.support) fv.push_back(inst.f.at(z));
      const double var_f = oracles::variance_of(fv, inst.law.probs);
      if (var_f < c * c * law_variance(inst.law) * (1 - 1e-12)) ++violations;
      // decreasing maps as well
      for (double& v : fv) v = -v;
      if (oracles::variance_of(fv, inst.law.probs) < c * c * law_variance(inst.law) * (1 - 1e-12)) ++violations;
    }
    CHECK(violations == 0);
  }

  TEST_CASE("lattice laws with gaps up to k0: variance ratio at least (delta / k0)^2") {
    std::mt19937_64 gen(2);
    int violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const int max_gap = 1 + static_cast<int>(gen() % 5);
      const double delta = 0.05 + (gen() % 100) / 30.0;
      const LawAndMap inst = random_instance(gen, max_gap, delta);
      std::int64_t k0 = 1;
      for (std::size_t i = 1; i < inst.law.size(); ++i) {
        k0 = std::max(k0, inst.law.support[i] - inst.law.support[i - 1]);
      }
      std::vector<double> fv;
      for (auto z : inst.law.support) fv.push_back(inst.f.at(z));
      const double bound = (delta / static_cast<double>(k0)) * (delta / static_cast<double>(k0)) * law_variance(inst.law);
      if (oracles::variance_of(fv, inst.law.probs) < bound * (1 - 1e-12)) ++violations;
    }
    CHECK(violations == 0);
  }

  TEST_CASE("exhaustive checks pass") {
    const ScoringScheme lcs3 = make_lcs_scheme(*make_alphabet("abc"));
    const ScoringScheme lcs2 = make_lcs_scheme(*binary_alphabet());
    CHECK(oracle_check("tilde2", ternary_iid(), 3, lcs3).pass);
    CHECK(oracle_check("tilde", BlockModel{kThirds}, 13, lcs2).pass);
    CHECK(oracle_check("pmf", BlockModel{kThirds}, 10, lcs2).pass);
    CHECK(oracle_check("deco", ternary_iid(), 3, lcs3).pass);
    CHECK(oracle_check("fiber", BlockModel{kThirds}, 12, lcs2).pass);
    CHECK_THROWS_AS(oracle_check("tilde", ternary_iid(), 3, lcs3), Error);
    CHECK_THROWS_AS(oracle_check("nope", ternary_iid(), 3, lcs3), Error);
  }
}
