#include <gtest/gtest.h>

#include "maxent_tail/maxent_tail.hpp"

using namespace maxent_tail;

TEST(Validate, AcceptsValidTriple) { EXPECT_TRUE(validate(TailConstraints{-1.0, 0.05, -1.5}).empty()); }

TEST(Validate, ShortfallAboveThreshold) {
    const auto v = validate(TailConstraints{-1.0, 0.05, -0.5});
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].field, "nu_minus");
}

TEST(Validate, PositiveThreshold) {
    const auto v = validate(TailConstraints{1.0, 0.05, -1.5});
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].field, "K");
}

TEST(Validate, ReportsEveryViolation) {
    const auto v = validate(TailConstraints{0.0, 0.7, 0.5});
    EXPECT_EQ(v.size(), 3u);
    EXPECT_THROW(require_valid(TailConstraints{0.0, 0.7, 0.5}), DomainError);
}

TEST(Validate, EpsilonBounds) {
    EXPECT_FALSE(is_valid({-1.0, 0.0, -1.5}));
    EXPECT_FALSE(is_valid({-1.0, 0.5, -1.5}));
    EXPECT_TRUE(is_valid({-1.0, 0.4999, -1.5}));
}

TEST(Validate, NonFiniteRejected) {
    EXPECT_FALSE(is_valid({-1.0, 0.05, -std::numeric_limits<double>::infinity()}));
    EXPECT_FALSE(is_valid({std::nan(""), 0.05, -1.5}));
}

TEST(ShortfallMass, Arithmetic) {
    EXPECT_DOUBLE_EQ(shortfall_mass({-1.0, 0.05, -1.5}), -0.075);
    EXPECT_DOUBLE_EQ(shortfall_mass({-1.0, 0.01, -2.0}), -0.02);
    EXPECT_NEAR(shortfall_mass({-1.0, 1e-15, -2.0}), 0.0, 1e-14);
}

TEST(GlobalConstraint, Feasibility) {
    const TailConstraints tc{-1.0, 0.05, -1.5};
    EXPECT_TRUE(validate(GlobalConstraint{GlobalKind::Mean, 0.05}, tc).empty());
    EXPECT_FALSE(validate(GlobalConstraint{GlobalKind::Mean, -2.0}, tc).empty());
    EXPECT_FALSE(validate(GlobalConstraint{GlobalKind::AbsMean, 0.07}, tc).empty());
    EXPECT_TRUE(validate(GlobalConstraint{GlobalKind::AbsMean, 0.8}, tc).empty());
    EXPECT_FALSE(validate(GlobalConstraint{GlobalKind::LogMoment, 0.0}, tc).empty());
}

TEST(FeasibleSet, ConvexUnderMixing) {
    // Two different members of the feasible set for the same tail constraints.
    const TailConstraints tc{-1.0, 0.05, -1.5};
    const auto a = build_case_a(tc, 0.05).density;
    const auto c = build_case_c(tc, 1.5).density;
    const auto mix = blend(a, c, 0.5);
    const auto r = feasibility_check(mix, tc);
    EXPECT_LT(r.tail_prob_err, 1e-8);
    EXPECT_LT(r.shortfall_err, 1e-8);
    EXPECT_NEAR(total_mass(mix), 1.0, 1e-8);
}
