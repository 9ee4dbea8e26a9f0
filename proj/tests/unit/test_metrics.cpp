#include <random>

#include <gtest/gtest.h>

#include "lpconc/metrics.hpp"

using namespace lpconc;

namespace {

using Vec = std::vector<double>;

// Textbook evaluation with std::pow; shares no code with the library kernels.
double pow_oracle(const Vec& x, LpExponent p) {
    if (p.is_infinite()) {
        double m = 0;
        for (double v : x) {
            m = std::max(m, std::fabs(v));
        }
        return m;
    }
    long double s = 0;
    for (double v : x) {
        s += std::pow(static_cast<long double>(std::fabs(v)), static_cast<long double>(p.value()));
    }
    return static_cast<double>(std::pow(s, 1.0L / static_cast<long double>(p.value())));
}

Vec random_vec(std::mt19937_64& rng, std::size_t d, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Vec v(d);
    for (auto& e : v) {
        e = u(rng);
    }
    return v;
}

Vec minus(const Vec& a, const Vec& b) {
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = a[i] - b[i];
    }
    return out;
}

} // namespace

TEST(LpExponent, Validation) {
    EXPECT_THROW(LpExponent(0.0), Error);
    EXPECT_THROW(LpExponent(-1.0), Error);
    EXPECT_THROW(LpExponent(std::nan("")), Error);
    EXPECT_TRUE(LpExponent::infinity().is_infinite());
    EXPECT_LT(LpExponent(10.0), LpExponent::infinity());
}

TEST(LpExponent, TextRoundTrip) {
    for (auto p : canonical_exponents()) {
        EXPECT_EQ(LpExponent::parse(p.to_string()), p);
    }
    EXPECT_EQ(LpExponent(10.0).to_string(), "10");
    EXPECT_EQ(LpExponent(0.01).to_string(), "0.01");
    EXPECT_EQ(LpExponent::infinity().to_string(), "inf");
    EXPECT_THROW(LpExponent::parse("two"), Error);
    EXPECT_THROW(LpExponent::parse("0"), Error);
}

TEST(LpExponent, CanonicalSet) {
    const auto ps = canonical_exponents();
    ASSERT_EQ(ps.size(), 8u);
    EXPECT_TRUE(std::is_sorted(ps.begin(), ps.end()));
    EXPECT_EQ(ps.front(), LpExponent(0.01));
    EXPECT_TRUE(ps.back().is_infinite());
}

TEST(LpFunctional, Examples) {
    EXPECT_DOUBLE_EQ(lp_functional(Vec{3, 4}, 2.0), 5.0);
    EXPECT_DOUBLE_EQ(lp_functional(Vec{1, 1}, 0.5), 4.0);
    EXPECT_DOUBLE_EQ(lp_functional(Vec{2, -3}, LpExponent::infinity()), 3.0);
    EXPECT_DOUBLE_EQ(lp_functional(Vec{1, 1}, 1.0), 2.0);
    EXPECT_THROW(lp_functional(Vec{}, 2.0), Error);
}

TEST(LpDistance, Examples) {
    const Vec x{0.3, -1.2, 7};
    for (auto p : canonical_exponents()) {
        EXPECT_EQ(lp_distance(x, x, p), 0.0);
    }
    EXPECT_DOUBLE_EQ(lp_distance(Vec{0, 0}, Vec{1, 1}, 0.5), 4.0);
    EXPECT_NEAR(lp_distance(Vec{0, 0}, Vec{1, 1}, 2.0), 1.41421356, 1e-8);
    EXPECT_THROW(lp_distance(Vec{1, 2}, Vec{1}, 2.0), Error);
}

TEST(LpDistance, MatchesPowOracleAndIsSymmetric) {
    std::mt19937_64 rng(1);
    std::vector<LpExponent> ps = canonical_exponents();
    ps.insert(ps.end(), {0.3, 1.5, 3.0, 7.0, 64.0});
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t d = 1 + trial % 37;
        const auto x = random_vec(rng, d, 5.0);
        const auto y = random_vec(rng, d, 5.0);
        for (auto p : ps) {
            const double got = lp_distance(x, y, p);
            const double want = pow_oracle(minus(x, y), p);
            EXPECT_NEAR(got, want, 1e-12 * want) << "p=" << p.to_string() << " d=" << d;
            EXPECT_EQ(got, lp_distance(y, x, p));
            EXPECT_GT(got, 0.0);
        }
    }
}

TEST(LpFunctional, HandlesZerosAndLargeValues) {
    EXPECT_EQ(lp_functional(Vec{0, 0, 0}, 0.01), 0.0);
    EXPECT_NEAR(lp_functional(Vec{0, 2, 0}, 0.01), 2.0, 1e-12);
    const double big = lp_functional(Vec{1e6, -1e6}, 10.0);
    EXPECT_TRUE(std::isfinite(big));
    EXPECT_NEAR(big, 1e6 * std::pow(2.0, 0.1), 1e-6);
}

TEST(LpFunctional, MonotoneInExponent) {
    std::mt19937_64 rng(2);
    const auto ps = canonical_exponents();
    for (int trial = 0; trial < 2000; ++trial) {
        const auto x = random_vec(rng, 1 + trial % 20);
        for (std::size_t a = 0; a < ps.size(); ++a) {
            for (std::size_t b = a + 1; b < ps.size(); ++b) {
                const double lo = lp_functional(x, ps[b]);
                ASSERT_GE(lp_functional(x, ps[a]), lo * (1 - 1e-12));
            }
        }
    }
}

TEST(LpFunctional, Homogeneity) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const auto x = random_vec(rng, 9);
        const double c = (trial % 2 ? -1.0 : 1.0) * (0.01 + trial);
        Vec cx = x;
        for (auto& v : cx) {
            v *= c;
        }
        for (auto p : canonical_exponents()) {
            const double want = std::fabs(c) * lp_functional(x, p);
            EXPECT_NEAR(lp_functional(cx, p), want, 1e-9 * want);
        }
    }
}

TEST(LpFunctional, TriangleInequalityForNorms) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 500; ++trial) {
        const auto x = random_vec(rng, 6);
        const auto y = random_vec(rng, 6);
        Vec s(6);
        for (int i = 0; i < 6; ++i) {
            s[i] = x[i] + y[i];
        }
        for (double p : {1.0, 2.0, 4.0, 10.0}) {
            EXPECT_LE(lp_functional(s, p), (lp_functional(x, p) + lp_functional(y, p)) * (1 + 1e-12));
        }
        EXPECT_LE(lp_functional(s, LpExponent::infinity()),
                  lp_functional(x, LpExponent::infinity()) + lp_functional(y, LpExponent::infinity()));
    }
}

TEST(LpFunctional, QuasinormViolatesTriangleInequality) {
    const Vec x{1, 0};
    const Vec y{0, 1};
    const Vec s{1, 1};
    EXPECT_DOUBLE_EQ(lp_functional(s, 0.5), 4.0);
    EXPECT_DOUBLE_EQ(lp_functional(x, 0.5) + lp_functional(y, 0.5), 2.0);
    EXPECT_GT(lp_functional(s, 0.5), lp_functional(x, 0.5) + lp_functional(y, 0.5));
}

TEST(LpRankKey, OrdersLikeDistance) {
    std::mt19937_64 rng(6);
    for (auto p : canonical_exponents()) {
        const auto q = random_vec(rng, 12);
        const auto a = random_vec(rng, 12);
        const auto b = random_vec(rng, 12);
        EXPECT_EQ(lp_rank_key(a, q, p) < lp_rank_key(b, q, p), lp_distance(a, q, p) < lp_distance(b, q, p));
    }
    // root of the power sum overflows here, the key does not
    const Vec far(200, 1.0);
    const Vec origin(200, 0.0);
    EXPECT_TRUE(std::isfinite(lp_rank_key(far, origin, 0.01)));
}

TEST(PairwiseSummary, SpecExamples) {
    const auto two = pairwise_summary(DataMatrix::from_rows({{0, 0}, {3, 0}}), 2.0);
    EXPECT_EQ(two.min, 3.0);
    EXPECT_EQ(two.max, 3.0);
    EXPECT_EQ(two.mean, 3.0);
    EXPECT_EQ(two.variance, 0.0);
    EXPECT_EQ(two.count, 1u);

    const auto line = pairwise_summary(DataMatrix::from_rows({{0}, {1}, {3}}), 1.0);
    EXPECT_EQ(line.min, 1.0);
    EXPECT_EQ(line.max, 3.0);
    EXPECT_DOUBLE_EQ(line.mean, 2.0);
    EXPECT_NEAR(line.variance, 2.0 / 3.0, 1e-15);
    EXPECT_EQ(line.count, 3u);

    EXPECT_THROW(pairwise_summary(DataMatrix::from_rows({{1}}), 2.0), Error);
}

TEST(PairwiseSummary, MatchesDoubleLoopOracle) {
    std::mt19937_64 rng(7);
    for (std::size_t n : {2u, 3u, 17u, 64u, 100u}) {
        const auto x = DataMatrix(n, 5, random_vec(rng, n * 5));
        for (auto p : canonical_exponents()) {
            std::vector<double> all;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = i + 1; j < n; ++j) {
                    all.push_back(lp_distance(x.row(i), x.row(j), p));
                }
            }
            long double mean = 0;
            for (double v : all) {
                mean += v;
            }
            mean /= all.size();
            long double var = 0;
            for (double v : all) {
                var += (v - mean) * (v - mean);
            }
            var /= all.size();

            const auto s = pairwise_summary(x, p);
            EXPECT_EQ(s.count, all.size());
            EXPECT_EQ(s.min, *std::min_element(all.begin(), all.end()));
            EXPECT_EQ(s.max, *std::max_element(all.begin(), all.end()));
            EXPECT_NEAR(s.mean, static_cast<double>(mean), 1e-12 * static_cast<double>(mean));
            EXPECT_NEAR(s.variance, static_cast<double>(var), 1e-12 * static_cast<double>(var) + 1e-300);
        }
    }
}

TEST(PairwiseSummary, InvariantsAndCount) {
    const auto x = gen_uniform_cube(300, 20, 9);
    for (auto p : canonical_exponents()) {
        const auto s = pairwise_summary(x, p);
        EXPECT_LE(s.min, s.mean);
        EXPECT_LE(s.mean, s.max);
        EXPECT_GT(s.variance, 0.0);
        EXPECT_EQ(s.count, 300u * 299u / 2u);
        const auto again = pairwise_summary(x, p);
        EXPECT_EQ(s.mean, again.mean);
        EXPECT_EQ(s.variance, again.variance);
    }
}

TEST(DistanceAccumulator, MergeIsOrderIndependentUpToRounding) {
    std::mt19937_64 rng(8);
    const auto v = random_vec(rng, 1000, 10.0);
    DistanceAccumulator whole;
    for (double e : v) {
        whole.add(e);
    }
    DistanceAccumulator a;
    DistanceAccumulator b;
    DistanceAccumulator c;
    for (std::size_t i = 0; i < v.size(); ++i) {
        (i < 100 ? a : i < 650 ? b : c).add(v[i]);
    }
    a.merge(b);
    a.merge(c);
    const auto s1 = whole.summary();
    const auto s2 = a.summary();
    EXPECT_EQ(s1.count, s2.count);
    EXPECT_EQ(s1.min, s2.min);
    EXPECT_EQ(s1.max, s2.max);
    EXPECT_NEAR(s1.mean, s2.mean, 1e-12);
    EXPECT_NEAR(s1.variance, s2.variance, 1e-10 * s1.variance);
}
