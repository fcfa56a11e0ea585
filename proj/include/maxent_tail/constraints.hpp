#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "maxent_tail/errors.hpp"

namespace maxent_tail {

/// Left-tail mandate: P(X <= K) = epsilon and E(X | X <= K) = nu_minus.
///
/// K is a loss threshold (strictly negative). epsilon is restricted to
/// (0, 1/2): the Gaussian calibration needs a negative normal quantile.
struct TailConstraints {
    double K = -1.0;
    double epsilon = 0.05;
    double nu_minus = -1.5;
};

struct Violation {
    std::string field;
    std::string message;
};

/// Every violated invariant of `tc`; empty when valid.
inline std::vector<Violation> validate(const TailConstraints& tc) {
    std::vector<Violation> out;
    if (!std::isfinite(tc.K) || !(tc.K < 0.0)) {
        out.push_back({"K", "K >= 0 (must be a strictly negative loss threshold)"});
    }
    if (!std::isfinite(tc.epsilon) || !(tc.epsilon > 0.0 && tc.epsilon < 0.5)) {
        out.push_back({"epsilon", "epsilon outside (0, 1/2)"});
    }
    if (!std::isfinite(tc.nu_minus) || !(tc.nu_minus < tc.K)) {
        out.push_back({"nu_minus", "nu_minus >= K (shortfall must lie below K)"});
    }
    return out;
}

inline bool is_valid(const TailConstraints& tc) { return validate(tc).empty(); }

/// Throws DomainError listing every violation.
inline void require_valid(const TailConstraints& tc) {
    const auto violations = validate(tc);
    if (violations.empty()) {
        return;
    }
    std::ostringstream msg;
    msg << "invalid tail constraints:";
    for (const auto& v : violations) {
        msg << " [" << v.field << ": " << v.message << "]";
    }
    throw DomainError(msg.str());
}

/// E(X 1{X <= K}) implied by the two tail constraints.
inline double shortfall_mass(const TailConstraints& tc) { return tc.epsilon * tc.nu_minus; }

enum class GlobalKind { Mean, AbsMean, LogMoment };

inline const char* to_string(GlobalKind k) {
    switch (k) {
        case GlobalKind::Mean:
            return "mean";
        case GlobalKind::AbsMean:
            return "abs_mean";
        case GlobalKind::LogMoment:
            return "log_moment";
    }
    return "unknown";
}

/// The constraint adjoined to the tail mandate to make the entropy
/// maximization well posed: E(X) = mu, E|X| = mu, or
/// E(log(1+|X|) | X > K) = A.
struct GlobalConstraint {
    GlobalKind kind = GlobalKind::Mean;
    double value = 0.0;
};

/// Feasibility of `g` against `tc`; empty when compatible.
inline std::vector<Violation> validate(const GlobalConstraint& g, const TailConstraints& tc) {
    std::vector<Violation> out;
    switch (g.kind) {
        case GlobalKind::Mean:
            if (!(g.value > tc.nu_minus)) {
                out.push_back({"mu", "mean must exceed nu_minus"});
            }
            break;
        case GlobalKind::AbsMean:
            if (!(g.value > tc.epsilon * std::abs(tc.nu_minus))) {
                out.push_back({"mu_abs", "absolute mean must exceed epsilon*|nu_minus|"});
            }
            break;
        case GlobalKind::LogMoment:
            if (!(g.value > 0.0)) {
                out.push_back({"A", "log moment must be positive"});
            }
            break;
    }
    return out;
}

}  // namespace maxent_tail
