#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "maxent_tail/maxent_tail.hpp"
#include "oracles.hpp"

using namespace maxent_tail;
using oracle::Real;

namespace {

const TailConstraints kBase{-1.0, 0.05, -1.5};

// eps f_- plus uniform mass on (K, N): feasible for the tail constraints but
// with no global constraint.
struct LeftPlusUniform {
    TailConstraints tc;
    double N;

    double pdf(double x) const {
        if (x < tc.K) {
            const double s = tc.K - tc.nu_minus;
            return tc.epsilon * std::exp(-(tc.K - x) / s) / s;
        }
        return x < N ? (1.0 - tc.epsilon) / (N - tc.K) : 0.0;
    }
    std::vector<double> breakpoints() const { return {tc.K, N}; }
};

}  // namespace

TEST(CaseA, Parameters) {
    const auto m = build_case_a(kBase, 0.05);
    EXPECT_NEAR(*m.derived.nu_plus, 0.131578947368421, 1e-12);
    const auto& segs = m.density.segments();
    ASSERT_EQ(segs.size(), 2u);
    EXPECT_DOUBLE_EQ(segs[0].param, 0.5);
    EXPECT_NEAR(segs[1].param, 1.131578947368421, 1e-12);
}

TEST(CaseA, ConstraintIntegrals) {
    const auto m = build_case_a(kBase, 0.05);
    const auto r = feasibility_check(m.density, kBase);
    EXPECT_LT(r.max(), 1e-8);
    EXPECT_NEAR(expectation(m.density, [](double x) { return x; }, -kInf, kBase.K), -0.075, 1e-8);
    EXPECT_LT(global_residual(m), 1e-8);
    EXPECT_NEAR(total_mass(m.density), 1.0, 1e-8);
}

TEST(CaseA, EntropyClosedFormMatchesQuadrature) {
    const auto m = build_case_a(kBase, 0.05);
    EXPECT_NEAR(m.density.entropy(), 1.281291142486693, 1e-12);
    EXPECT_NEAR(m.density.entropy(), entropy_quadrature(m.density), 1e-6);
}

TEST(CaseA, ProbabilityPositive) {
    const auto m = build_case_a(kBase, 0.05);
    const double s_plus = *m.derived.nu_plus - kBase.K;
    EXPECT_NEAR(1.0 - m.density.cdf(0.0), 0.95 * std::exp(-1.0 / s_plus), 1e-14);
    EXPECT_NEAR(1.0 - m.density.cdf(0.0), 0.392580281186439, 1e-12);
}

TEST(CaseA, CdfAtThresholdIsEpsilon) {
    EXPECT_NEAR(build_case_a(kBase, 0.05).density.cdf(kBase.K), kBase.epsilon, 1e-15);
}

TEST(CaseA, Infeasible) {
    EXPECT_THROW(build_case_a(kBase, -2.0), InfeasibleError);
    try {
        build_case_a(kBase, -2.0);
    } catch (const InfeasibleError& e) {
        EXPECT_STREQ(e.what(), "infeasible: nu_plus <= K");
    }
}

TEST(CaseA, SpikeLimitOfLeftPiece) {
    const double delta = 1e-3;
    const auto m = build_case_a({-1.0, 0.05, -1.0 - 1e-7}, 0.05);
    EXPECT_NEAR(m.density.cdf(-1.0) - m.density.cdf(-1.0 - delta), 0.05, 1e-12);
}

TEST(CaseA, ExponentialFamilyAudit) {
    const auto m = build_case_a(kBase, 0.05);
    const auto a = exp_family_audit(m);
    EXPECT_LT(a.max_deviation, 1e-9);
    EXPECT_NEAR(a.left_slope, 1.0 / (kBase.K - kBase.nu_minus), 1e-9);
    EXPECT_NEAR(a.right_slope, -1.0 / (*m.derived.nu_plus - kBase.K), 1e-9);
}

TEST(CaseC, AuditShowsCurvature) {
    const auto m = build_case_c(kBase, 1.5);
    AuditOptions opt;
    opt.right_span = 10.0;
    EXPECT_GT(exp_family_audit(m, opt).right_deviation, 0.01);
}

TEST(CaseA, MaximalityOverPerturbationFamily) {
    const auto mee = build_case_a(kBase, 0.05);
    const double h0 = mee.density.entropy();
    const double s = *mee.derived.nu_plus - kBase.K;
    for (int i = 1; i <= 20; ++i) {
        const double d = 0.04 * i;
        // Split the right piece into two scales with the same mass and mean.
        const auto lo = build_case_a(kBase, 0.05 - 0.95 * s * d);
        const auto hi = build_case_a(kBase, 0.05 + 0.95 * s * d);
        const auto p = blend(lo.density, hi.density, 0.5);
        EXPECT_LT(feasibility_check(p, kBase).max(), 1e-8);
        EXPECT_NEAR(expectation(p, [](double x) { return x; }, -kInf, kInf), 0.05, 1e-8);
        EXPECT_LT(entropy_quadrature(p), h0 - 1e-9) << "delta=" << d;
    }
}

TEST(Entropy, Concavity) {
    const auto f1 = build_case_a(kBase, 0.05).density;
    const auto f2 = build_case_a(kBase, 0.6).density;
    for (double w : {0.1, 0.5, 0.9}) {
        const double mixed = entropy_quadrature(blend(f1, f2, w));
        EXPECT_GE(mixed + 1e-9, w * f1.entropy() + (1.0 - w) * f2.entropy());
    }
}

TEST(Entropy, UnboundedWithoutGlobalConstraint) {
    double prev = -kInf;
    for (double N : {10.0, 100.0, 1000.0}) {
        const LeftPlusUniform d{kBase, N};
        EXPECT_LT(feasibility_check(d, kBase).max(), 1e-8);
        const double h = entropy_quadrature(d);
        EXPECT_GT(h, prev);
        prev = h;
    }
}

TEST(Entropy, UnitExponential) {
    const PiecewiseDensity d({{SegmentForm::ExpRight, -1.0, 1.0, 1.0}});
    EXPECT_NEAR(d.entropy(), 1.0, 1e-15);
}

TEST(Entropy, ShiftInvariant) {
    const auto m = build_case_a(kBase, 0.05);
    EXPECT_NEAR(m.density.shifted(0.7).entropy(), m.density.entropy(), 1e-14);
    EXPECT_NEAR(entropy_quadrature(m.density.shifted(-3.0)), m.density.entropy(), 1e-6);
}

TEST(Entropy, AtomIsAnError) {
    const PiecewiseDensity d({{SegmentForm::ExpRight, -1.0, 1.0, 0.9}}, Atom{-1.0, 0.1});
    EXPECT_THROW(d.entropy(), DomainError);
    EXPECT_THROW(entropy_quadrature(d), DomainError);
}

TEST(Feasibility, StandardNormalMisses) {
    const auto r = feasibility_check(NormalDensity{0.0, 1.0}, kBase);
    EXPECT_NEAR(r.tail_prob_err, 0.108655253931457, 1e-10);
}

TEST(CaseB, RightPieceNormalized) {
    for (double K : {-0.3, -1.0, -4.0}) {
        for (double lam : {0.05, 1.0, 7.0}) {
            const Segment seg{SegmentForm::TwoSidedExp, K, lam, 1.0};
            const auto q = integrate_split([&](double x) { return seg.unit_pdf(x); }, K, kInf,
                                           std::vector<double>{0.0}, 1e-13);
            EXPECT_NEAR(q.value, 1.0, 1e-10);
        }
    }
}

TEST(CaseB, AbsoluteMeanThreeWays) {
    const auto m = build_case_b(kBase, 0.8);
    const double lam = *m.derived.lambda1;
    EXPECT_NEAR(lam, 1.016089982695, 1e-9);
    const double target = (0.8 - 0.05 * 1.5) / 0.95;
    // Antiderivative of |x| lam e^{-lam|x|} on [K, 0) and [0, inf).
    const Real L = lam;
    const Real K = kBase.K;
    const Real c = L / (2 - std::exp(L * K));
    const Real left = (1 - std::exp(L * K) * (1 - L * K)) / (L * L);
    const Real right = 1 / (L * L);
    EXPECT_NEAR(static_cast<double>(c * (left + right)), target, 1e-10);
    EXPECT_NEAR(two_sided_abs_mean(lam, kBase.K), target, 1e-10);
    // Whole-density quadrature.
    EXPECT_LT(global_residual(m), 1e-8);
    EXPECT_LT(feasibility_check(m.density, kBase).max(), 1e-8);
    EXPECT_NEAR(m.density.entropy(), entropy_quadrature(m.density), 1e-6);
}

TEST(CaseB, AbsoluteMeanDecreasingInLambda) {
    double prev = kInf;
    for (double lam = 1e-3; lam < 1e3; lam *= 1.5) {
        const double v = two_sided_abs_mean(lam, -1.0);
        EXPECT_LT(v, prev);
        prev = v;
    }
}

TEST(CaseB, Infeasible) {
    EXPECT_THROW(build_case_b(kBase, 0.05), InfeasibleError);
    // A target beyond every attainable right-piece absolute mean.
    EXPECT_THROW(build_case_b(kBase, 1e12), BracketError);
}

TEST(CaseC, NormalizerAndLogMoment) {
    EXPECT_NEAR(power_normalizer(1.5, -1.0), 1.097631072937817, 1e-13);
    EXPECT_NEAR(log_moment_from_alpha(1.5, -1.0), 0.517822158459, 1e-11);
    for (double K : {-0.5, -1.0}) {
        for (double alpha : {0.5, 1.5, 3.0}) {
            auto f = [&](Real x) { return std::pow(1 + std::fabs(x), -(1 + alpha)); };
            const Real C = oracle::integrate(f, K, 0, 64) + oracle::integrate_power_tail(f, 80.0L / alpha);
            EXPECT_NEAR(power_normalizer(alpha, K), static_cast<double>(C), 1e-10) << alpha << " " << K;
            auto g = [&](Real x) { return std::log1p(std::fabs(x)) * f(x); };
            const Real A = (oracle::integrate(g, K, 0, 64) + oracle::integrate_power_tail(g, 80.0L / alpha)) / C;
            EXPECT_NEAR(log_moment_from_alpha(alpha, K), static_cast<double>(A), 1e-8) << alpha << " " << K;
            const auto m = build_case_c({K, 0.05, 1.5 * K}, alpha);
            EXPECT_LT(global_residual(m), 1e-8);
            EXPECT_LT(feasibility_check(m.density, m.tc).max(), 1e-8);
        }
    }
}

TEST(CaseC, SolveAlphaRoundTrip) {
    EXPECT_NEAR(solve_alpha_from_A(0.517822158459, -1.0), 1.5, 1e-6);
    // A rounded to seven digits moves alpha by about 2e-6 (dA/dalpha is near -0.32).
    EXPECT_NEAR(solve_alpha_from_A(0.5178215, -1.0), 1.5, 3e-6);
    for (double alpha : {0.3, 1.5, 3.0, 10.0}) {
        EXPECT_NEAR(solve_alpha_from_A(log_moment_from_alpha(alpha, -0.5), -0.5), alpha, 1e-6 * alpha);
    }
    const auto m = build_case_c_from_A(kBase, 0.517822158459);
    EXPECT_NEAR(*m.derived.alpha, 1.5, 1e-6);
}

TEST(CaseC, LogMomentDecreasingInAlpha) {
    double prev = kInf;
    for (double a = 0.5; a <= 10.0; a += 0.1) {
        const double A = log_moment_from_alpha(a, -1.0);
        EXPECT_LT(A, prev);
        prev = A;
    }
}

TEST(CaseC, UnattainableA) {
    EXPECT_THROW(solve_alpha_from_A(1e6, -1.0), BracketError);
    EXPECT_THROW(solve_alpha_from_A(-1.0, -1.0), BracketError);
}

TEST(CaseC, EntropyMatchesQuadrature) {
    for (double alpha : {0.5, 1.5, 3.0}) {
        const auto m = build_case_c(kBase, alpha);
        EXPECT_NEAR(m.density.entropy(), entropy_quadrature(m.density), 1e-6) << alpha;
    }
}

TEST(Distribution, QuantileInvertsCdf) {
    const std::vector<MaxentModel> models{build_case_a(kBase, 0.05), build_case_b(kBase, 0.8),
                                          build_case_c(kBase, 0.5), build_case_c(kBase, 3.0)};
    for (const auto& m : models) {
        for (double p : {1e-9, 0.01, 0.05, 0.2, 0.5, 0.9, 0.999999}) {
            EXPECT_NEAR(m.density.cdf(m.density.quantile(p)), p, 1e-10) << to_string(m.which);
        }
    }
}

TEST(Distribution, SampleDeterministicAndWorkerInvariant) {
    const auto m = build_case_c(kBase, 1.5);
    const auto a = sample(m.density, 50000, 7, 1);
    const auto b = sample(m.density, 50000, 7, 3);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, sample(m.density, 50000, 8, 1));
}

TEST(Distribution, SampleMeanWithinMonteCarloError) {
    const auto m = build_case_a(kBase, 0.05);
    const std::size_t n = 200000;
    const auto xs = sample(m.density, n, 11);
    const auto mom = sample_moments(xs);
    const double sd = std::sqrt(characteristic_fn(m).variance());
    EXPECT_NEAR(mom.mean, 0.05, 4.0 * sd / std::sqrt(static_cast<double>(n)));
}

TEST(PiecewiseDensity, RejectsInconsistentWeights) {
    EXPECT_THROW(PiecewiseDensity({{SegmentForm::ExpRight, -1.0, 1.0, 0.7}}), DomainError);
    EXPECT_THROW(PiecewiseDensity({{SegmentForm::ExpRight, -1.0, -1.0, 1.0}}), DomainError);
}
