#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "seqfluct/align.hpp"
#include "seqfluct/error.hpp"
#include "seqfluct/estimators.hpp"
#include "seqfluct/oracle.hpp"
#include "support/oracles.hpp"

using namespace seqfluct;

namespace {

const BlockModelParams kThirds(3, 1.0 / 3, 1.0 / 3, 1.0 / 3);

Model block_model() { return BlockModel{kThirds}; }
Model ternary_iid() { return IidModel(make_alphabet("abc"), SymbolDist({0.25, 0.25, 0.5}), 0, 1); }

bool same(const EstimateReport& a, const EstimateReport& b) {
  return a.name == b.name && a.point == b.point && a.half_width == b.half_width && a.samples == b.samples &&
         a.seed == b.seed && a.params_fingerprint == b.params_fingerprint;
}

}  // namespace

TEST_SUITE("estimators") {
  TEST_CASE("Welford merge equals one pass") {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> normal(5.0, 2.0);
    std::vector<double> xs(1000);
    for (double& x : xs) x = normal(gen);
    Welford all, left, right;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      all.add(xs[i]);
      (i < 377 ? left : right).add(xs[i]);
    }
    left.merge(right);
    CHECK(left.count == all.count);
    CHECK(left.mean == doctest::Approx(all.mean).epsilon(1e-13));
    CHECK(left.variance() == doctest::Approx(all.variance()).epsilon(1e-12));
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / 1000.0;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    CHECK(all.variance() == doctest::Approx(ss / 999.0).epsilon(1e-12));
  }

  TEST_CASE("jackknife half-width covers a known variance") {
    std::mt19937_64 gen(4);
    std::normal_distribution<double> normal(0.0, 3.0);
    int covered = 0;
    for (int rep = 0; rep < 100; ++rep) {
      std::vector<double> xs(2000);
      for (double& x : xs) x = normal(gen);
      const auto [var, hw] = jackknife_variance(xs);
      CHECK(hw > 0.0);
      if (std::abs(var - 9.0) <= hw) ++covered;
    }
    // nominal 95%; allow sampling slack over 100 replications
    CHECK(covered >= 85);
  }

  TEST_CASE("tail bound arithmetic") {
    CHECK(chebyshev_bound(2.0) == doctest::Approx(0.25));
    CHECK(hoeffding_bound(1.5, 1.5, 8) == doctest::Approx(2.0 * std::exp(-4.0)));
    CHECK_THROWS_AS(chebyshev_bound(0.0), Error);
    CHECK_THROWS_AS(hoeffding_bound(-1.0, 1.0, 3), Error);
    CHECK_THROWS_AS(hoeffding_bound(1.0, 1.0, 0), Error);
  }

  TEST_CASE("reports do not depend on the worker count") {
    const ScoringScheme lcs = make_lcs_scheme(*binary_alphabet());
    const RunOptions one{77, 1, "fp"}, four{77, 4, "fp"};
    const MomentsReport a = mc_moments(block_model(), 60, lcs, 300, one);
    const MomentsReport b = mc_moments(block_model(), 60, lcs, 300, four);
    CHECK(same(a.mean, b.mean));
    CHECK(same(a.variance, b.variance));
    CHECK(same(a.gamma, b.gamma));
    CHECK(same(mc_moments(block_model(), 60, lcs, 300, one).variance, a.variance));
    const A1Report s = verify_a1(block_model(), 60, default_transform(block_model()), lcs, 0.05, 200, one);
    const A1Report t = verify_a1(block_model(), 60, default_transform(block_model()), lcs, 0.05, 200, four);
    CHECK(same(s.fraction, t.fraction));
    CHECK(s.mean_gain == t.mean_gain);
  }

  TEST_CASE("Monte Carlo mean matches the exact mean at small n") {
    const Model m = ternary_iid();
    const ScoringScheme lcs = make_lcs_scheme(*make_alphabet("abc"));
    const ExactMoments em = exact_moments(m, 4, lcs);
    const MomentsReport r = mc_moments(m, 4, lcs, 20000, RunOptions{5, 2, ""});
    CHECK(std::abs(r.mean.point - em.mean) <= 1.5 * r.mean.half_width);
    CHECK(std::abs(r.variance.point - em.variance) <= 1.5 * r.variance.half_width);
  }

  TEST_CASE("variance scan stays below the trivial bound") {
    const ScoringScheme lcs = make_lcs_scheme(*binary_alphabet());
    const VarianceScan scan = variance_scan(block_model(), lcs, {50, 100, 200}, 400, RunOptions{3, 1, ""});
    REQUIRE(scan.rows.size() == 3);
    for (const auto& row : scan.rows) {
      CHECK(row.ratio > 0.0);
      // Var L <= n for LCS: changing one letter moves L by at most one (Efron-Stein)
      CHECK(row.ratio < 1.0);
    }
    CHECK(scan.spread == doctest::Approx(scan.max_ratio / scan.min_ratio));
    CHECK_THROWS_AS(variance_scan(block_model(), lcs, {100, 50}, 400, RunOptions{}), Error);
  }

  TEST_CASE("A1 reports an always-inapplicable model") {
    // n < l: x is one trailing run, so there is never a short and a long block
    const Model tiny = BlockModel{BlockModelParams(10, 0.3, 0.4, 0.3)};
    const A1Report r =
        verify_a1(tiny, 5, default_transform(tiny), make_lcs_scheme(*binary_alphabet()), 0.1, 100, RunOptions{});
    CHECK(r.inapplicable == 100);
    CHECK(r.applicable == 0);
    CHECK(r.fraction.point == 0.0);
    CHECK_THROWS_AS(verify_a1(tiny, 5, default_transform(tiny), make_lcs_scheme(*binary_alphabet()), -0.1, 10,
                              RunOptions{}),
                    Error);
  }

  TEST_CASE("A2 bound holds on sampled pairs") {
    const ScoringScheme general(3, {3, 1, 0, 1, 2, 1, 0, 1, 3}, 0.5);
    const A2Report r = verify_a2(ternary_iid(), 20, default_transform(ternary_iid()), general, 200, RunOptions{});
    CHECK(r.bound == -3.0);
    CHECK(r.min_gain >= r.bound);
    const A2Report b = verify_a2(block_model(), 40, default_transform(block_model()),
                                 make_lcs_scheme(*binary_alphabet()), 200, RunOptions{});
    CHECK(b.bound == -1.0);
    CHECK(b.min_gain >= -1.0);
  }

  TEST_CASE("sample_uv follows the exact joint law") {
    for (const Model& m : {ternary_iid(), block_model()}) {
      const std::size_t n = 6;
      std::map<UVStats, std::size_t> counts;
      const RandomStream root(8);
      const std::size_t draws = 100000;
      for (std::size_t i = 0; i < draws; ++i) {
        RandomStream rng = root.substream(i);
        ++counts[sample_uv(m, n, rng)];
      }
      double chi2 = 0.0;
      std::size_t cells = 0;
      for (const UVStats& uv : support_points(m, n)) {
        const double e = uv_pmf(m, n, uv) * static_cast<double>(draws);
        if (e < 5.0) continue;
        const double d = static_cast<double>(counts[uv]) - e;
        chi2 += d * d / e;
        ++cells;
      }
      // generous: mean cells - 1, sd sqrt(2 cells)
      CHECK(chi2 < static_cast<double>(cells) + 5.0 * std::sqrt(2.0 * static_cast<double>(cells)));
    }
  }

  TEST_CASE("coverage, windows and floors in trivial limits") {
    CHECK(exact_coverage(block_model(), 300, 50.0) == doctest::Approx(1.0));
    CHECK(exact_coverage(ternary_iid(), 300, 50.0) == doctest::Approx(1.0));
    // a window narrower than one lattice step has at most one point
    CHECK(exact_window_variance(ternary_iid(), 400, 1e-6, {200, 0}) == 0.0);
    // n < l: the whole law sits on one point (t, u, r) = (0, 0, n)
    const Model tiny = BlockModel{BlockModelParams(5, 0.3, 0.4, 0.3)};
    const FloorReport f = pointmass_floor(tiny, 3, 10.0);
    CHECK(f.min_pmf == doctest::Approx(1.0));
    CHECK(f.scaled == doctest::Approx(3.0));
  }

  TEST_CASE("iid coverage floors are below the exact tails") {
    const Model m = ternary_iid();
    const CoverageReport r = coverage_check(m, 400, 1.0, 2000, RunOptions{2, 1, ""});
    // p = 1/2, p_b = 1/2
    CHECK(r.v_floor == doctest::Approx(0.75));
    CHECK(r.u_floor == doctest::Approx(0.75));
    const double v_exact = 1.0 - oracles::binomial_outside(800, 0.5, 400 - std::sqrt(800.0), 400 + std::sqrt(800.0));
    CHECK(r.v_exact == doctest::Approx(v_exact).epsilon(1e-9));
    CHECK(r.v_exact >= r.v_floor);
    CHECK(r.u_exact_min >= r.u_floor);
  }

  TEST_CASE("pilot c reaches the target coverage") {
    const double c = pilot_c(block_model(), 2000, 0.9, 5000, 4);
    CHECK(c > 0.0);
    CHECK(exact_coverage(block_model(), 2000, c) > 0.85);
  }

  TEST_CASE("conditional variance agrees with its exact value") {
    const CondVarReport r = conditional_variance(ternary_iid(), 400, 1.0, 400000, RunOptions{6, 2, ""});
    CHECK(r.min_ratio > 0.0);
    CHECK(r.exact_min_ratio > 0.0);
    for (const auto& row : r.rows) {
      if (row.count < 2000) continue;
      CHECK(row.variance == doctest::Approx(row.exact).epsilon(0.15));
    }
  }

  TEST_CASE("variance decomposition at Monte Carlo scale") {
    // Var L >= Var of the bin means, up to noise
    const ScoringScheme lcs = make_lcs_scheme(*binary_alphabet());
    const ConditionalProfile p =
        conditional_profile(block_model(), 60, lcs, 4000, 3.0, RunOptions{9, 1, ""}, ProfileOptions{false, 30});
    Welford all, means;
    std::uint64_t total = 0;
    for (const auto& b : p.bins) {
      Welford w = b.score;
      all.merge(w);
      total += b.score.count;
    }
    double between = 0.0;
    for (const auto& b : p.bins) {
      const double d = b.score.mean - all.mean;
      between += static_cast<double>(b.score.count) / static_cast<double>(total) * d * d;
    }
    CHECK(all.variance() >= between * 0.9);
  }

  TEST_CASE("block sum tail bounds hold empirically") {
    const TailCheck h = block_sum_hoeffding(kThirds, 50, 0.3, 20000, RunOptions{1, 1, ""});
    CHECK(h.empirical.point <= h.bound);
    const TailCheck c = block_sum_chebyshev(kThirds, 50, 1.5, 20000, RunOptions{1, 1, ""});
    CHECK(c.empirical.point <= c.bound);
  }
}
