#include "iaa/stats.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace iaa::stats;

namespace {

std::vector<double> distinct_values(std::mt19937_64& rng, std::size_t n) {
    std::vector<double> pool(40);
    std::iota(pool.begin(), pool.end(), 0.0);
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(n);
    return pool;
}

std::vector<double> uniform(std::mt19937_64& rng, std::size_t n, double shift = 0.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng) + shift;
    return v;
}

}  // namespace

TEST(Sample, RejectsEmptyAndNonFinite) {
    EXPECT_THROW(Sample({}), StatsError);
    EXPECT_THROW(Sample({1.0, NAN}), StatsError);
    EXPECT_THROW(Sample({INFINITY}), StatsError);
    EXPECT_DOUBLE_EQ(Sample({1.0, 2.0, 6.0}).mean(), 3.0);
}

TEST(EmpiricalCdf, Examples) {
    const auto f = empirical_cdf(Sample({0.2, 0.4, 0.4, 0.9}));
    EXPECT_EQ(f(0.1), 0.0);
    EXPECT_EQ(f(0.2), 0.25);
    EXPECT_EQ(f(0.4), 0.75);
    EXPECT_EQ(f(0.5), 0.75);
    EXPECT_EQ(f(1.0), 1.0);
    ASSERT_EQ(f.support().size(), 3u);
    EXPECT_EQ(f.heights().back(), 1.0);
}

TEST(EmpiricalCdf, MatchesCountingOracle) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v = uniform(rng, 1 + trial);
        for (auto& x : v) x = std::round(x * 10.0) / 10.0;
        const auto f = empirical_cdf(Sample(v));
        double prev = 0.0;
        for (double x = -0.05; x <= 1.1; x += 0.05) {
            ASSERT_EQ(f(x), oracle::ecdf(v, x));
            ASSERT_GE(f(x), prev);
            prev = f(x);
        }
    }
}

TEST(Midranks, TiesShareMeanPosition) {
    const std::vector<double> v{3.0, 1.0, 3.0, 2.0};
    EXPECT_EQ(midranks(v), (std::vector<double>{3.5, 1.0, 3.5, 2.0}));
}

TEST(MannWhitney, SpecExampleCompleteSeparation) {
    const auto r = mann_whitney(Sample({1, 2, 3}), Sample({4, 5, 6}));
    EXPECT_EQ(r.u_statistic, 0.0);
    EXPECT_EQ(r.method, UTestMethod::Exact);
    EXPECT_NEAR(r.p_value, 0.1, 1e-12);
}

TEST(MannWhitney, IdenticalSamplesAreDegenerate) {
    const auto r = mann_whitney(Sample({2, 2, 2}), Sample({2, 2}));
    EXPECT_TRUE(r.degenerate);
    EXPECT_EQ(r.p_value, 1.0);
    EXPECT_EQ(r.u_statistic, 3.0);
}

TEST(MannWhitney, ExactCountsSumToBinomial) {
    for (std::size_t a = 1; a <= 8; ++a) {
        for (std::size_t b = 1; b <= 8; ++b) {
            const auto c = exact_u_counts(a, b);
            ASSERT_EQ(c.size(), a * b + 1);
            double total = 0.0;
            for (std::size_t k = 0; k < c.size(); ++k) {
                total += c[k];
                ASSERT_EQ(c[k], c[c.size() - 1 - k]);
            }
            double binom = 1.0;
            for (std::size_t i = 1; i <= a; ++i) binom = binom * static_cast<double>(b + i) / static_cast<double>(i);
            ASSERT_NEAR(total, binom, 1e-6);
        }
    }
}

TEST(MannWhitney, ExactMatchesEnumerationAllAlternatives) {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 150; ++trial) {
        const std::size_t na = 1 + trial % 6, nb = 1 + (trial / 6) % 6;
        auto pooled = distinct_values(rng, na + nb);
        const std::vector<double> a(pooled.begin(), pooled.begin() + na), b(pooled.begin() + na, pooled.end());
        const struct {
            Alternative alt;
            oracle::Tail tail;
        } cases[] = {{Alternative::TwoSided, oracle::Tail::TwoSided},
                     {Alternative::AGreater, oracle::Tail::Upper},
                     {Alternative::ALess, oracle::Tail::Lower}};
        for (const auto& c : cases) {
            const auto r = mann_whitney(Sample(a), Sample(b), c.alt);
            ASSERT_EQ(r.method, UTestMethod::Exact);
            ASSERT_EQ(r.u_statistic, oracle::u_statistic(a, b));
            ASSERT_NEAR(r.p_value, oracle::enumerated_u_pvalue(a, b, c.tail), 1e-12);
        }
    }
}

TEST(MannWhitney, TiesForceNormalApproximation) {
    const auto r = mann_whitney(Sample({1, 2, 2, 3}), Sample({2, 4, 5}));
    EXPECT_EQ(r.method, UTestMethod::NormalApprox);
    EXPECT_EQ(r.u_statistic, oracle::u_statistic({1, 2, 2, 3}, {2, 4, 5}));
}

TEST(MannWhitney, TieCorrectedVarianceMatchesPermutationVariance) {
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int> level(0, 5);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> a(4 + trial % 5), b(8);
        for (auto& x : a) x = level(rng);
        for (auto& x : b) x = level(rng) + 1;
        const auto r = mann_whitney(Sample(a), Sample(b));
        if (r.degenerate) continue;
        ASSERT_EQ(r.method, UTestMethod::NormalApprox);
        const auto [mean, var] = oracle::enumerated_u_moments(a, b);
        const double z = (std::abs(r.u_statistic - mean) - 0.5) / std::sqrt(var);
        const double expect = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
        EXPECT_NEAR(r.p_value, expect, 1e-9);
    }
}

TEST(MannWhitney, SymmetricUnderSwap) {
    std::mt19937_64 rng(24);
    for (int trial = 0; trial < 40; ++trial) {
        const auto a = uniform(rng, 5 + trial % 20), b = uniform(rng, 3 + trial % 17, 0.1);
        const auto ab = mann_whitney(Sample(a), Sample(b));
        const auto ba = mann_whitney(Sample(b), Sample(a));
        EXPECT_EQ(ab.u_statistic + ba.u_statistic, static_cast<double>(a.size() * b.size()));
        EXPECT_NEAR(ab.p_value, ba.p_value, 1e-12);
        EXPECT_GE(ab.p_value, 0.0);
        EXPECT_LE(ab.p_value, 1.0);
    }
}

TEST(NormalSf, KnownValues) {
    EXPECT_NEAR(normal_sf(0.0), 0.5, 1e-15);
    EXPECT_NEAR(normal_sf(1.959963984540054), 0.025, 1e-12);
    EXPECT_NEAR(normal_sf(-1.0), 0.8413447460685429, 1e-12);
}

TEST(CohensD, MatchesTextbookFormula) {
    std::mt19937_64 rng(25);
    for (int trial = 0; trial < 30; ++trial) {
        const auto a = uniform(rng, 2 + trial), b = uniform(rng, 3 + trial, 0.2);
        EXPECT_NEAR(cohens_d(Sample(a), Sample(b)).cohens_d, oracle::cohens_d(a, b), 1e-9);
    }
    EXPECT_NEAR(cohens_d(Sample({1, 2, 3}), Sample({2, 3, 4})).cohens_d, -1.0, 1e-12);
}

TEST(CohensD, Errors) {
    EXPECT_THROW(cohens_d(Sample({1.0}), Sample({1.0, 2.0})), StatsError);
    EXPECT_THROW(cohens_d(Sample({1.0, 1.0}), Sample({2.0, 2.0})), StatsError);
}

TEST(Fosd, StatisticMatchesOracle) {
    std::mt19937_64 rng(26);
    for (int trial = 0; trial < 40; ++trial) {
        auto a = uniform(rng, 3 + trial), b = uniform(rng, 5 + trial % 7, 0.05);
        for (auto* v : {&a, &b}) {
            for (auto& x : *v) x = std::round(x * 20.0) / 20.0;
        }
        FosdOptions opt;
        opt.iterations = 100;
        const auto r = fosd_test(Sample(a), Sample(b), FosdHypothesis::ADominatesB, opt);
        EXPECT_NEAR(r.statistic, oracle::fosd_statistic(a, b), 1e-12);
        const auto s = fosd_test(Sample(a), Sample(b), FosdHypothesis::BDominatesA, opt);
        EXPECT_NEAR(s.statistic, oracle::fosd_statistic(b, a), 1e-12);
    }
}

TEST(Fosd, ShiftedUniformRejectsOnlyTheFalseDirection) {
    std::mt19937_64 rng(27);
    const Sample low(uniform(rng, 200)), high(uniform(rng, 200, 0.3));
    const FosdOptions opt{1000, 5, 1};
    const auto wrong = fosd_test(low, high, FosdHypothesis::ADominatesB, opt);
    const auto right = fosd_test(low, high, FosdHypothesis::BDominatesA, opt);
    EXPECT_LT(wrong.p_value, 0.001);
    EXPECT_GT(right.p_value, 0.5);
    EXPECT_EQ(wrong.bootstrap_iterations, 1000u);
}

TEST(Fosd, ThreadCountDoesNotChangeResult) {
    std::mt19937_64 rng(28);
    const Sample a(uniform(rng, 150)), b(uniform(rng, 120, 0.02));
    const auto base = fosd_test(a, b, FosdHypothesis::ADominatesB, {500, 9, 1});
    for (unsigned t : {2u, 4u, 7u}) {
        const auto r = fosd_test(a, b, FosdHypothesis::ADominatesB, {500, 9, t});
        EXPECT_EQ(r.p_value, base.p_value);
        EXPECT_EQ(r.statistic, base.statistic);
    }
    const auto other_seed = fosd_test(a, b, FosdHypothesis::ADominatesB, {500, 10, 1});
    EXPECT_EQ(other_seed.statistic, base.statistic);
}

TEST(Fosd, DegenerateAndErrors) {
    const auto r = fosd_test(Sample({0.5, 0.5}), Sample({0.5}), FosdHypothesis::ADominatesB);
    EXPECT_TRUE(r.degenerate);
    EXPECT_EQ(r.p_value, 1.0);
    EXPECT_THROW(fosd_test(Sample({0.1, 0.2}), Sample({0.3}), FosdHypothesis::ADominatesB, {99, 0, 1}), StatsError);
}

TEST(ScaledSup, IntegerDifference) {
    const std::vector<double> a{0.1, 0.2}, b{0.15, 0.3, 0.4};
    // at 0.2: F_a = 1, F_b = 1/3 -> 6 * (2/3) = 4
    EXPECT_EQ(scaled_sup_cdf_difference(a, b), 4);
    EXPECT_LE(scaled_sup_cdf_difference(b, a), 0);
}
