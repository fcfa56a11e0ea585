#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "maxent_tail/maxent_tail.hpp"
#include "oracles.hpp"

using namespace maxent_tail;

namespace {

const TailConstraints kBase{-1.0, 0.05, -1.5};

double oracle_b(double eps) {
    const auto eta = oracle::normal_quantile(eps);
    return static_cast<double>(oracle::normal_pdf(eta) / (eps * eta));
}

}  // namespace

TEST(BEpsilon, KnownValue) {
    EXPECT_NEAR(b_epsilon(0.05), -1.254040343596045, 1e-12);
    EXPECT_NEAR(b_epsilon(0.05), oracle_b(0.05), 1e-12);
}

TEST(BEpsilon, BelowMinusOneOnLogGrid) {
    for (double e = 1e-12; e < 0.49; e *= 1.3) {
        EXPECT_LT(b_epsilon(e), -1.0) << e;
    }
    EXPECT_LT(b_epsilon(0.49), -1.0);
}

TEST(BEpsilon, SmallEpsilonLimit) {
    const double b = b_epsilon(1e-12);
    EXPECT_GT(b, -1.03);
    EXPECT_LT(b, -1.0);
    EXPECT_NEAR(b, oracle_b(1e-12), 1e-10);
}

TEST(BEpsilon, DomainErrors) {
    EXPECT_THROW(b_epsilon(0.0), DomainError);
    EXPECT_THROW(b_epsilon(0.5), DomainError);
}

TEST(MillsInequality, HoldsAndTightensInTail) {
    for (double x = -0.1; x > -30.0; x -= 0.25) {
        EXPECT_LE(std_normal_cdf(x), std_normal_pdf(x) / (-x)) << x;
    }
    const double ratio = std_normal_cdf(-8.0) * 8.0 / std_normal_pdf(-8.0);
    EXPECT_GE(ratio, 0.98);
    EXPECT_LE(ratio, 1.0);
}

TEST(Calibrate, ReferenceTriple) {
    const auto fit = calibrate_gaussian(kBase);
    EXPECT_NEAR(fit.mu, 0.968191323166608, 1e-10);
    EXPECT_NEAR(fit.sigma, 1.196575361428604, 1e-10);
    EXPECT_NEAR(fit.mu + fit.eta_eps * fit.sigma, kBase.K, 1e-10);
    EXPECT_NEAR(fit.mu - fit.eta_eps * fit.b_eps * fit.sigma, kBase.nu_minus, 1e-10);
}

TEST(Calibrate, ShortfallByQuadrature) {
    for (const TailConstraints& tc : {kBase, TailConstraints{-0.5, 0.01, -0.9}, TailConstraints{-2.0, 0.1, -2.1}}) {
        const auto fit = calibrate_gaussian(tc);
        const auto d = fit.density();
        EXPECT_NEAR(d.cdf(tc.K), tc.epsilon, 1e-10);
        const double es = expectation(d, [](double x) { return x; }, -kInf, tc.K);
        EXPECT_NEAR(es, tc.epsilon * tc.nu_minus, 1e-8);
    }
}

TEST(Calibrate, SpikeLimit) {
    const auto fit = calibrate_gaussian({-1.0, 0.05, -1.0 - 1e-9});
    EXPECT_NEAR(fit.mu, -1.0, 1e-8);
    EXPECT_LT(fit.sigma, 1e-8);
}

TEST(Calibrate, SigmaIncreasesWithEpsilonAtFixedMean) {
    // Holding mu fixed, the pair (K, nu_-) moves with eps; sigma = (mu - K)/(-eta).
    const double mu = 0.1;
    const double K = -1.0;
    double prev = 0.0;
    for (double e = 0.01; e < 0.45; e += 0.02) {
        const double sigma = (mu - K) / (-std_normal_quantile(e));
        const auto tc = gaussian_tail_constraints(mu, sigma, K);
        const auto fit = calibrate_gaussian(tc);
        EXPECT_NEAR(fit.mu, mu, 1e-9);
        EXPECT_GT(fit.sigma, prev);
        prev = fit.sigma;
    }
}

TEST(NoFreeLunch, ReferenceMargins) {
    const auto a = no_free_lunch(kBase);
    EXPECT_TRUE(a.positive_mean);
    EXPECT_NEAR(a.margin, 1.5 - 1.254040343596045, 1e-12);
    const auto b = no_free_lunch({-1.0, 0.05, -1.2});
    EXPECT_FALSE(b.positive_mean);
    EXPECT_NEAR(b.margin, 1.2 - 1.254040343596045, 1e-12);
    EXPECT_LT(calibrate_gaussian({-1.0, 0.05, -1.2}).mu, 0.0);
}

TEST(NoFreeLunch, BoundaryGivesZeroMean) {
    const double nu = 1.0 * b_epsilon(0.05);  // |nu_-| = K B(eps) with K = -1
    const TailConstraints tc{-1.0, 0.05, nu};
    EXPECT_NEAR(no_free_lunch(tc).margin, 0.0, 1e-15);
    EXPECT_LT(std::abs(calibrate_gaussian(tc).mu), 1e-10);
}

TEST(NoFreeLunch, SignAgreesWithCalibratedMean) {
    for (double K : {-0.5, -1.0, -2.0}) {
        for (double e : {0.01, 0.05, 0.1, 0.3}) {
            for (int i = 1; i < 20; ++i) {
                const TailConstraints tc{K, e, 2.0 * K - K * i / 20.0};
                const auto fit = calibrate_gaussian(tc);
                const auto nfl = no_free_lunch(tc);
                EXPECT_EQ(fit.mu > 0.0, nfl.positive_mean);
            }
        }
    }
}

TEST(GaussianEntropy, KnownValues) {
    EXPECT_NEAR(gaussian_entropy(1.0 / std::sqrt(2.0 * std::numbers::pi * std::numbers::e)), 0.0, 1e-15);
    EXPECT_NEAR(gaussian_entropy(1.0), 1.4189385332046727, 1e-14);
    EXPECT_NEAR(gaussian_entropy(2.6) - gaussian_entropy(1.3), std::log(2.0), 1e-12);
    EXPECT_THROW(gaussian_entropy(0.0), DomainError);
}

TEST(RoundTrip, ThetaToGaussianAndBack) {
    const auto fit = calibrate_gaussian(kBase);
    const auto back = gaussian_tail_constraints(fit.mu, fit.sigma, kBase.K);
    EXPECT_NEAR(back.epsilon, kBase.epsilon, 1e-9);
    EXPECT_NEAR(back.nu_minus, kBase.nu_minus, 1e-9);
}

TEST(StudentT, ScaleMeetsTailProbability) {
    const double s = student_t_scale(3.0, kBase, 0.0);
    EXPECT_NEAR(s, 0.424923743274, 1e-10);
    EXPECT_NEAR(static_cast<double>(oracle::student_t_cdf(kBase.K, 0.0, s, 3.0)), kBase.epsilon, 1e-9);
    const StudentTDensity t{0.0, s, 3.0};
    EXPECT_NEAR(t.cdf(kBase.K), kBase.epsilon, 1e-12);
}

TEST(StudentT, LinearInDistance) {
    const double s1 = student_t_scale(4.0, {-1.0, 0.05, -1.5}, 0.2);
    const double s2 = student_t_scale(4.0, {-2.2, 0.05, -3.0}, 0.2);
    EXPECT_NEAR(s2, 2.0 * s1, 1e-8);
}

TEST(StudentT, GaussianRecovery) {
    const double s = student_t_scale(1e6, kBase, 0.0);
    EXPECT_NEAR(s * std_normal_quantile(0.05) / (kBase.K - 0.0), 1.0, 0.01);
}

TEST(StudentT, ClosedFormMagnitudeAgrees) {
    for (double alpha : {1.0, 3.0, 10.0}) {
        const double s = student_t_scale(alpha, kBase, 0.0);
        EXPECT_NEAR(s, std::abs(kBase.K) * student_t_kappa(alpha, kBase.epsilon), 1e-10);
    }
}

TEST(StudentT, QuantileInvertsCdf) {
    const StudentTDensity t{0.3, 0.7, 2.5};
    for (double p : {1e-6, 0.05, 0.5, 0.8, 0.999}) {
        EXPECT_NEAR(t.cdf(t.quantile(p)), p, 1e-12);
    }
}

TEST(StudentT, Errors) {
    EXPECT_THROW(student_t_scale(0.0, kBase, 0.0), DomainError);
    EXPECT_THROW(student_t_scale(3.0, kBase, -2.0), DomainError);
}

TEST(Mixture, RightMeanAndIdentity) {
    const auto m = mixture_two_normals(kBase, 0.05, 0.3, 0.5);
    EXPECT_NEAR(m.mu2, 0.131578947368421, 1e-12);
    EXPECT_NEAR(m.mean(), 0.05, 1e-15);
    EXPECT_EQ(m.lambda, kBase.epsilon);
    EXPECT_EQ(m.mu1, kBase.nu_minus);
}

TEST(Mixture, NarrowComponentsMeetTail) {
    const auto m = mixture_two_normals(kBase, 0.05, 1e-4, 1e-4);
    const auto r = feasibility_check(m, kBase);
    EXPECT_LT(r.tail_prob_err, 1e-6);
    EXPECT_LT(std::abs(expectation(m, [](double x) { return x; }, -kInf, kBase.K) / m.cdf(kBase.K) - kBase.nu_minus),
              1e-4);
}

TEST(Mixture, Errors) {
    EXPECT_THROW(mixture_two_normals(kBase, -2.0, 0.1, 0.1), ConfigError);
    EXPECT_THROW(mixture_two_normals(kBase, 0.05, 0.0, 0.1), ConfigError);
}

TEST(StopLoss, FarBarrierIsUnstoppedWalk) {
    StopLossParams p;
    p.K = -1e9;
    p.paths = 20000;
    p.drift = 0.001;
    const auto r = stoploss_simulate(p);
    EXPECT_EQ(r.atom_mass, 0.0);
    const double sd = p.vol * std::sqrt(static_cast<double>(p.steps));
    const double se = sd / std::sqrt(static_cast<double>(p.paths));
    EXPECT_NEAR(r.terminal_mean, p.drift * p.steps, 4.0 * se);
    EXPECT_NEAR(r.survivor_variance, sd * sd, 0.05 * sd * sd);
}

TEST(StopLoss, HistogramAndAtomSumToOne) {
    StopLossParams p;
    p.paths = 5000;
    const auto r = stoploss_simulate(p);
    double total = r.atom_mass;
    for (const auto& b : r.histogram) {
        total += b.frequency;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_GE(r.atom_mass, 0.0);
    EXPECT_LE(r.atom_mass, 1.0);
}

TEST(StopLoss, WorkerCountInvariant) {
    StopLossParams p;
    p.paths = 30000;
    p.workers = 1;
    const auto a = stoploss_simulate(p);
    p.workers = 4;
    const auto b = stoploss_simulate(p);
    EXPECT_EQ(a.atom_mass, b.atom_mass);
    EXPECT_EQ(a.terminal_mean, b.terminal_mean);
    EXPECT_EQ(a.terminal_skewness, b.terminal_skewness);
}

TEST(StopLoss, Errors) {
    StopLossParams p;
    p.vol = 0.0;
    EXPECT_THROW(stoploss_simulate(p), DomainError);
    p.vol = 0.01;
    p.steps = 0;
    EXPECT_THROW(stoploss_simulate(p), DomainError);
}
