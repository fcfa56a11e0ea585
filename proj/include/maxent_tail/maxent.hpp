#pragma once

// Maximum-entropy extensions of the tail constraints. The left tail is
// always the exponential piece eps * (1/(K-nu_-)) exp(-(K-x)/(K-nu_-)); the
// right piece depends on the adjoined global constraint:
//   Case A  E(X) = mu               -> exponential from K with mean nu_+
//   Case B  E|X| = mu               -> lambda1 exp(-lambda1 |x|) on [K, inf)
//   Case C  E(log(1+|X|)|X>K) = A   -> (1+|x|)^-(1+alpha) on [K, inf)

#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include "maxent_tail/constraints.hpp"
#include "maxent_tail/density.hpp"
#include "maxent_tail/errors.hpp"
#include "maxent_tail/special_numerics.hpp"

namespace maxent_tail {

enum class MaxentCase { A, B, C };

inline const char* to_string(MaxentCase c) {
    switch (c) {
        case MaxentCase::A:
            return "A";
        case MaxentCase::B:
            return "B";
        case MaxentCase::C:
            return "C";
    }
    return "?";
}

struct MaxentDerived {
    std::optional<double> nu_plus;
    std::optional<double> lambda1;
    std::optional<double> alpha;
    std::optional<double> A;
    std::optional<double> C_alpha;
};

struct MaxentModel {
    MaxentCase which = MaxentCase::A;
    TailConstraints tc;
    GlobalConstraint global;
    PiecewiseDensity density;
    MaxentDerived derived;
};

/// Range searched for the Case C tail exponent. The log moment A(alpha) is
/// decreasing, so this also fixes the attainable A.
inline constexpr double kAlphaMin = 1e-4;
inline constexpr double kAlphaMax = 1e4;

/// Range searched for the Case B rate.
inline constexpr double kLambdaMin = 1e-9;
inline constexpr double kLambdaMax = 1e6;

namespace detail {

inline Segment left_tail_segment(const TailConstraints& tc) {
    return {SegmentForm::ExpLeft, tc.K, tc.K - tc.nu_minus, tc.epsilon};
}

// Fails unless g is strictly monotone (in the stated direction) on a log grid.
template <class G>
void require_monotone_decreasing(const G& g, double lo, double hi, const char* what) {
    constexpr int n = 400;
    const double llo = std::log(lo);
    const double lhi = std::log(hi);
    double prev = g(lo);
    for (int i = 1; i <= n; ++i) {
        const double x = std::exp(llo + (lhi - llo) * i / n);
        const double v = g(x);
        if (!(v < prev)) {
            std::ostringstream msg;
            msg << what << ": not monotone near " << x << "; root may not be unique";
            throw NumericError(msg.str());
        }
        prev = v;
    }
}

}  // namespace detail

/// Case A. nu_+ solves eps nu_- + (1 - eps) nu_+ = mu.
inline MaxentModel build_case_a(const TailConstraints& tc, double mu) {
    require_valid(tc);
    const double nu_plus = (mu - tc.epsilon * tc.nu_minus) / (1.0 - tc.epsilon);
    if (!(nu_plus > tc.K)) {
        throw InfeasibleError("infeasible: nu_plus <= K");
    }
    MaxentModel m;
    m.which = MaxentCase::A;
    m.tc = tc;
    m.global = {GlobalKind::Mean, mu};
    m.density = PiecewiseDensity({detail::left_tail_segment(tc),
                                  {SegmentForm::ExpRight, tc.K, nu_plus - tc.K, 1.0 - tc.epsilon}});
    m.derived.nu_plus = nu_plus;
    return m;
}

/// Case B. The absolute-mean identity is eps |nu_-| + (1 - eps) E(|X| | X > K) = mu.
inline MaxentModel build_case_b(const TailConstraints& tc, double mu_abs) {
    require_valid(tc);
    const double left_abs = tc.epsilon * std::abs(tc.nu_minus);
    if (!(mu_abs > left_abs)) {
        throw InfeasibleError("infeasible: mu_abs <= epsilon*|nu_minus|");
    }
    const double target = (mu_abs - left_abs) / (1.0 - tc.epsilon);
    const double K = tc.K;
    detail::require_monotone_decreasing([K](double lam) { return two_sided_abs_mean(lam, K); }, kLambdaMin,
                                        kLambdaMax, "build_case_b");
    auto excess = [&](double log_lam) { return two_sided_abs_mean(std::exp(log_lam), K) - target; };
    double lambda1;
    try {
        lambda1 = std::exp(find_root(excess, {std::log(kLambdaMin), std::log(kLambdaMax)}, 0.0));
    } catch (const BracketError&) {
        std::ostringstream msg;
        msg << "infeasible: no lambda1 in (" << kLambdaMin << ", " << kLambdaMax
            << ") gives right-piece absolute mean " << target;
        throw BracketError(msg.str());
    }
    MaxentModel m;
    m.which = MaxentCase::B;
    m.tc = tc;
    m.global = {GlobalKind::AbsMean, mu_abs};
    m.density = PiecewiseDensity({detail::left_tail_segment(tc),
                                  {SegmentForm::TwoSidedExp, K, lambda1, 1.0 - tc.epsilon}});
    m.derived.lambda1 = lambda1;
    return m;
}

/// Log moment A implied by tail exponent alpha at threshold K.
inline double log_moment_from_alpha(double alpha, double K) {
    if (!(alpha > 0.0)) {
        throw DomainError("log_moment_from_alpha: alpha must be positive");
    }
    if (!(K < 0.0)) {
        throw DomainError("log_moment_from_alpha: K must be negative");
    }
    return power_log_moment(alpha, K);
}

/// Inverts A(alpha) = 1/alpha - log(1-K) / (2 (1-K)^alpha - 1) for alpha in
/// [kAlphaMin, kAlphaMax].
inline double solve_alpha_from_A(double A, double K) {
    if (!(K < 0.0)) {
        throw DomainError("solve_alpha_from_A: K must be negative");
    }
    if (!(A > 0.0) || !std::isfinite(A)) {
        throw BracketError("solve_alpha_from_A: A must be positive and finite");
    }
    auto excess = [&](double log_alpha) { return power_log_moment(std::exp(log_alpha), K) - A; };
    try {
        return std::exp(find_root(excess, {std::log(kAlphaMin), std::log(kAlphaMax)}, 0.0));
    } catch (const BracketError&) {
        std::ostringstream msg;
        msg << "solve_alpha_from_A: A=" << A << " unattainable for K=" << K << " (attainable range ("
            << power_log_moment(kAlphaMax, K) << ", " << power_log_moment(kAlphaMin, K) << "))";
        throw BracketError(msg.str());
    }
}

/// Case C with the tail exponent given.
inline MaxentModel build_case_c(const TailConstraints& tc, double alpha) {
    require_valid(tc);
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw DomainError("build_case_c: alpha must be positive");
    }
    MaxentModel m;
    m.which = MaxentCase::C;
    m.tc = tc;
    const double A = power_log_moment(alpha, tc.K);
    m.global = {GlobalKind::LogMoment, A};
    m.density = PiecewiseDensity({detail::left_tail_segment(tc),
                                  {SegmentForm::PowerRight, tc.K, alpha, 1.0 - tc.epsilon}});
    m.derived.alpha = alpha;
    m.derived.A = A;
    m.derived.C_alpha = power_normalizer(alpha, tc.K);
    return m;
}

/// Case C with the log-moment constraint value given.
inline MaxentModel build_case_c_from_A(const TailConstraints& tc, double A) {
    require_valid(tc);
    return build_case_c(tc, solve_alpha_from_A(A, tc.K));
}

// ---------------------------------------------------------------------------
// Audits
// ---------------------------------------------------------------------------

struct FeasibilityResiduals {
    double tail_prob_err = 0.0;
    double shortfall_err = 0.0;

    double max() const { return std::max(tail_prob_err, shortfall_err); }
};

/// |P(X <= K) - eps| and |E(X 1{X <= K}) - eps nu_-| by quadrature.
template <Density D>
FeasibilityResiduals feasibility_check(const D& d, const TailConstraints& tc, double tol = 1e-12) {
    const double mass = expectation(d, [](double) { return 1.0; }, -kInf, tc.K, tol);
    const double first = expectation(d, [](double x) { return x; }, -kInf, tc.K, tol);
    return {std::abs(mass - tc.epsilon), std::abs(first - shortfall_mass(tc))};
}

/// |E g(X) - target| for the model's global constraint, by quadrature.
inline double global_residual(const MaxentModel& m, double tol = 1e-12) {
    const auto& d = m.density;
    switch (m.global.kind) {
        case GlobalKind::Mean:
            return std::abs(expectation(d, [](double x) { return x; }, -kInf, kInf, tol) - m.global.value);
        case GlobalKind::AbsMean:
            return std::abs(expectation(d, [](double x) { return std::abs(x); }, -kInf, kInf, tol) -
                            m.global.value);
        case GlobalKind::LogMoment: {
            const double K = m.tc.K;
            const double num = expectation(d, [](double x) { return std::log1p(std::abs(x)); }, K, kInf, tol);
            const double den = expectation(d, [](double) { return 1.0; }, K, kInf, tol);
            return std::abs(num / den - m.global.value);
        }
    }
    return kInf;
}

struct AuditOptions {
    /// Widths of the grids left and right of K; 0 picks ten scale lengths.
    double left_span = 0.0;
    double right_span = 0.0;
    int points = 201;
};

struct AuditReport {
    double max_deviation = 0.0;
    double left_deviation = 0.0;
    double right_deviation = 0.0;
    /// Secant slopes of ln f across each grid.
    double left_slope = 0.0;
    double right_slope = 0.0;
};

/// Checks that ln f is affine on each side of K, as an exponential family in
/// (x, 1{x<=K}, x 1{x<=K}) must be. Reports the largest absolute second
/// difference of ln f on a uniform grid per side.
inline AuditReport exp_family_audit(const MaxentModel& m, const AuditOptions& opt = {}) {
    if (opt.points < 3) {
        throw DomainError("exp_family_audit: need at least 3 grid points");
    }
    const double K = m.tc.K;
    const double left_span = opt.left_span > 0.0 ? opt.left_span : 10.0 * (K - m.tc.nu_minus);
    double right_span = opt.right_span;
    if (!(right_span > 0.0)) {
        right_span = m.derived.nu_plus ? 10.0 * (*m.derived.nu_plus - K) : 10.0;
    }
    auto side = [&](double sign, double span, double& deviation, double& slope) {
        const double h = span / (opt.points - 1);
        std::vector<double> lf(opt.points);
        for (int i = 0; i < opt.points; ++i) {
            // Start one step off K so the grid stays inside the open side.
            const double x = K + sign * h * (i + 1);
            lf[i] = std::log(m.density.pdf(x));
        }
        deviation = 0.0;
        for (int i = 1; i + 1 < opt.points; ++i) {
            deviation = std::max(deviation, std::abs(lf[i + 1] - 2.0 * lf[i] + lf[i - 1]));
        }
        slope = sign * (lf.back() - lf.front()) / (h * (opt.points - 1));
    };
    AuditReport r;
    side(-1.0, left_span, r.left_deviation, r.left_slope);
    side(+1.0, right_span, r.right_deviation, r.right_slope);
    r.max_deviation = std::max(r.left_deviation, r.right_deviation);
    return r;
}

}  // namespace maxent_tail
