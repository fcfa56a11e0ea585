#include <algorithm>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "maxent_tail/maxent_tail.hpp"

using namespace maxent_tail;

TEST(Portfolio, SingleAsset) {
    const auto m = portfolio_moments({{1.0}, {0.07}, {{0.09}}});
    EXPECT_DOUBLE_EQ(m.mean, 0.07);
    EXPECT_DOUBLE_EQ(m.variance, 0.09);
}

TEST(Portfolio, TwoAssetsByHand) {
    const auto m = portfolio_moments({{0.5, 0.5}, {0.1, 0.3}, {{0.04, 0.0}, {0.0, 0.16}}});
    // 0.5*0.1 + 0.5*0.3 and 0.25*0.04 + 0.25*0.16.
    EXPECT_NEAR(m.mean, 0.2, 1e-15);
    EXPECT_NEAR(m.variance, 0.05, 1e-15);
}

TEST(Portfolio, ZeroCovariance) {
    const auto m = portfolio_moments({{0.2, 0.3, 0.5}, {0.0, 0.1, 0.2}, {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}});
    EXPECT_EQ(m.variance, 0.0);
}

TEST(Portfolio, RandomPsdVarianceNonNegative) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + trial % 5;
        const int rank = 1 + trial % n;  // rank-deficient matrices included
        std::vector<std::vector<double>> g(n, std::vector<double>(rank));
        for (auto& row : g) {
            for (auto& v : row) {
                v = z(rng);
            }
        }
        PortfolioSpec p;
        p.covariance.assign(n, std::vector<double>(n, 0.0));
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                for (int k = 0; k < rank; ++k) {
                    p.covariance[i][j] += g[i][k] * g[j][k];
                }
            }
        }
        double sum = 0.0;
        for (int i = 0; i < n - 1; ++i) {
            p.weights.push_back(u(rng));
            sum += p.weights.back();
        }
        p.weights.push_back(1.0 - sum);
        p.mean_vector.assign(n, 0.01);
        EXPECT_GE(portfolio_moments(p).variance, 0.0);
    }
}

TEST(Portfolio, Errors) {
    EXPECT_THROW(portfolio_moments({{0.5, 0.5}, {0.1}, {{1, 0}, {0, 1}}}), DomainError);
    EXPECT_THROW(portfolio_moments({{0.6, 0.6}, {0.1, 0.1}, {{1, 0}, {0, 1}}}), DomainError);
    EXPECT_THROW(portfolio_moments({{0.5, 0.5}, {0.1, 0.1}, {{1, 0.2}, {0.1, 1}}}), DomainError);
    EXPECT_THROW(portfolio_moments({{0.5, 0.5}, {0.1, 0.1}, {{1, 2}, {2, 1}}}), DomainError);
}

TEST(Barbell, EightyTwenty) {
    const auto b = barbell_constraints(0.8, 0.05);
    EXPECT_NEAR(b.K, -0.2, 1e-15);
    EXPECT_NEAR(b.loss_bound, 0.2, 1e-15);
    EXPECT_TRUE(b.hard_floor_certificate);
    EXPECT_FALSE(b.degenerate_safe);
    EXPECT_FALSE(b.tail().has_value());
}

TEST(Barbell, NearlyAllSafe) {
    const auto b = barbell_constraints(1.0 - 1e-12, 0.05);
    EXPECT_LT(b.K, 0.0);
    EXPECT_GT(b.K, -1e-9);
    EXPECT_TRUE(b.degenerate_safe);
}

TEST(Barbell, ShortfallBelowFloorRejected) {
    EXPECT_THROW(barbell_constraints(0.5, 0.01, -0.6), DomainError);
    BarbellOptions opt;
    opt.allow_beyond_floor = true;
    const auto b = barbell_constraints(0.5, 0.01, -0.6, opt);
    EXPECT_FALSE(b.hard_floor_certificate);
    ASSERT_TRUE(b.tail().has_value());
    EXPECT_DOUBLE_EQ(b.tail()->nu_minus, -0.6);
}

TEST(Barbell, DomainErrors) {
    EXPECT_THROW(barbell_constraints(0.0, 0.05), DomainError);
    EXPECT_THROW(barbell_constraints(1.0, 0.05), DomainError);
    EXPECT_THROW(barbell_constraints(0.8, 0.6), DomainError);
    EXPECT_THROW(barbell_constraints(0.8, 0.05, -0.1), DomainError);
}

TEST(Barbell, LossBoundIsModelFree) {
    const double w = 0.8;
    const auto b = barbell_constraints(w, 0.05);
    // Risky sleeves bounded below by total loss, from very different families.
    const auto heavy = build_case_c({-0.5, 0.05, -0.9}, 0.7).density;
    std::vector<double> risky = sample(heavy, 1000000, 1);
    for (double& r : risky) {
        r = std::max(r, -1.0);
    }
    const auto floor_model = barbell_density(barbell_constraints(0.0 + 1e-12, 0.05), 0.1);
    const auto other = sample(floor_model, 1000000, 2);
    risky.insert(risky.end(), other.begin(), other.end());
    double worst = kInf;
    for (double r : risky) {
        worst = std::min(worst, barbell_return(w, r));
    }
    EXPECT_GE(worst, -(1.0 - w));
    EXPECT_GE(worst, b.K);
}

TEST(Barbell, DensityHasAtomAtFloor) {
    const auto b = barbell_constraints(0.8, 0.05);
    const auto d = barbell_density(b, 0.02);
    ASSERT_TRUE(d.atom().has_value());
    EXPECT_DOUBLE_EQ(d.atom()->mass, 0.05);
    EXPECT_NEAR(d.cdf(b.K), 0.05, 1e-15);
    EXPECT_EQ(d.cdf(b.K - 1e-12), 0.0);
    EXPECT_NEAR(d.mean(), 0.02, 1e-14);
    EXPECT_THROW(barbell_density(b, -0.5), InfeasibleError);
}

TEST(Compare, ReferenceTriple) {
    const auto c = compare_frameworks({-1.0, 0.05, -1.5});
    EXPECT_NEAR(c.gaussian.mu, 0.968191323166608, 1e-10);
    EXPECT_NEAR(c.gaussian.sigma, 1.196575361428604, 1e-10);
    EXPECT_NEAR(c.gaussian_entropy, 1.598402144483949, 1e-10);
    EXPECT_LT(c.gaussian_residuals.max(), 1e-8);
    EXPECT_LT(c.case_a_residuals.max(), 1e-8);
    EXPECT_NEAR(c.case_a.global.value, c.gaussian.mu, 1e-15);
    EXPECT_NEAR(c.entropy_gap, c.case_a_entropy - c.gaussian_entropy, 1e-15);
    // The Gaussian is feasible for the Case A constraints, so it cannot beat the maximizer.
    EXPECT_GT(c.entropy_gap, 0.0);
    EXPECT_NEAR(c.round_trip.epsilon, 0.05, 1e-9);
    EXPECT_NEAR(c.round_trip.nu_minus, -1.5, 1e-9);
}
