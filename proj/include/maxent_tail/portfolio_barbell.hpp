#pragma once

// Portfolio moments and the barbell mapping from a numeraire fraction to a
// model-free loss floor and tail constraints.

#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "maxent_tail/constraints.hpp"
#include "maxent_tail/density.hpp"
#include "maxent_tail/errors.hpp"
#include "maxent_tail/gaussian_world.hpp"
#include "maxent_tail/maxent.hpp"

namespace maxent_tail {

struct PortfolioSpec {
    std::vector<double> weights;
    std::vector<double> mean_vector;
    std::vector<std::vector<double>> covariance;
};

struct PortfolioMoments {
    double mean = 0.0;
    double variance = 0.0;
};

/// Throws DomainError on dimension mismatch, weights not summing to one,
/// asymmetric covariance or an eigenvalue below -1e-10.
inline void require_valid(const PortfolioSpec& p) {
    const std::size_t m = p.weights.size();
    if (m == 0) {
        throw DomainError("portfolio: empty weight vector");
    }
    if (p.mean_vector.size() != m || p.covariance.size() != m) {
        throw DomainError("portfolio: dimension mismatch between weights, mean_vector and covariance");
    }
    double wsum = 0.0;
    for (double w : p.weights) {
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-9) {
        std::ostringstream msg;
        msg << "portfolio: weights sum to " << wsum << ", not 1";
        throw DomainError(msg.str());
    }
    Eigen::MatrixXd cov(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        if (p.covariance[i].size() != m) {
            throw DomainError("portfolio: covariance is not square");
        }
        for (std::size_t j = 0; j < m; ++j) {
            cov(i, j) = p.covariance[i][j];
        }
    }
    const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw DomainError("portfolio: covariance is not symmetric");
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10) {
        std::ostringstream msg;
        msg << "portfolio: covariance not positive semidefinite (min eigenvalue " << eig.eigenvalues().minCoeff()
            << ")";
        throw DomainError(msg.str());
    }
}

/// E(X) = w mu^T and V(X) = w Sigma w^T.
inline PortfolioMoments portfolio_moments(const PortfolioSpec& p) {
    require_valid(p);
    const auto m = static_cast<Eigen::Index>(p.weights.size());
    const Eigen::Map<const Eigen::VectorXd> w(p.weights.data(), m);
    const Eigen::Map<const Eigen::VectorXd> mu(p.mean_vector.data(), m);
    Eigen::MatrixXd cov(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            cov(i, j) = p.covariance[i][j];
        }
    }
    // Symmetrize so rounding in the input cannot yield a negative quadratic form.
    cov = 0.5 * (cov + cov.transpose());
    return {w.dot(mu), std::max(0.0, w.dot(cov * w))};
}

// ---------------------------------------------------------------------------
// Barbell
// ---------------------------------------------------------------------------

struct BarbellOptions {
    /// Accept a shortfall below the floor. The sleeve is then not bounded at
    /// total loss and the model-free certificate is withdrawn.
    bool allow_beyond_floor = false;
    /// 1 - w_safe below this is flagged as a degenerate all-safe portfolio.
    double degenerate_tol = 1e-9;
};

struct BarbellConstraints {
    double w_safe = 0.0;
    /// K = -(1 - w_safe): the portfolio cannot lose more than the risky sleeve.
    double K = 0.0;
    double epsilon = 0.0;
    /// Shortfall in portfolio units. With a hard floor it equals K: the tail
    /// mass sits as an atom at the floor.
    double nu_minus = 0.0;
    /// Model-free bound on the portfolio loss, 1 - w_safe.
    double loss_bound = 0.0;
    /// P(X < K) = 0 for every return model of the risky sleeve.
    bool hard_floor_certificate = false;
    bool degenerate_safe = false;

    /// Tail constraints proper; only when the shortfall lies strictly below K.
    std::optional<TailConstraints> tail() const {
        if (nu_minus < K) {
            return TailConstraints{K, epsilon, nu_minus};
        }
        return std::nullopt;
    }
};

/// Maps a numeraire fraction to portfolio-unit tail constraints. Without a
/// shortfall (or with the shortfall at the floor) the risky sleeve is bounded
/// at total loss: probability eps of ending exactly at K and nothing below.
inline BarbellConstraints barbell_constraints(double w_safe, double epsilon, std::optional<double> nu_minus = std::nullopt,
                                              const BarbellOptions& opt = {}) {
    if (!(w_safe > 0.0 && w_safe < 1.0)) {
        throw DomainError("barbell: w_safe must lie in (0,1)");
    }
    if (!(epsilon > 0.0 && epsilon < 0.5)) {
        throw DomainError("barbell: epsilon must lie in (0, 1/2)");
    }
    BarbellConstraints b;
    b.w_safe = w_safe;
    b.loss_bound = 1.0 - w_safe;
    b.K = -b.loss_bound;
    b.epsilon = epsilon;
    b.degenerate_safe = b.loss_bound < opt.degenerate_tol;
    const double nm = nu_minus.value_or(b.K);
    if (nm > b.K) {
        throw DomainError("barbell: shortfall nu_minus cannot exceed K");
    }
    if (nm < b.K) {
        if (!opt.allow_beyond_floor) {
            std::ostringstream msg;
            msg << "barbell: shortfall " << nm << " below hard floor " << b.K;
            throw DomainError(msg.str());
        }
        b.hard_floor_certificate = false;
    } else {
        b.hard_floor_certificate = true;
    }
    b.nu_minus = nm;
    return b;
}

/// Maximum-entropy density of a hard-floor barbell with overall mean mu: an
/// atom of mass eps at K and an exponential piece above K carrying the rest.
/// This is the nu_- -> K limit of Case A.
inline PiecewiseDensity barbell_density(const BarbellConstraints& b, double mu) {
    if (!b.hard_floor_certificate) {
        throw ConfigError("barbell_density: needs a hard-floor barbell");
    }
    const double nu_plus = (mu - b.epsilon * b.K) / (1.0 - b.epsilon);
    if (!(nu_plus > b.K)) {
        throw InfeasibleError("infeasible: nu_plus <= K");
    }
    return PiecewiseDensity({{SegmentForm::ExpRight, b.K, nu_plus - b.K, 1.0 - b.epsilon}}, Atom{b.K, b.epsilon});
}

/// Portfolio return from a risky-sleeve return; the numeraire earns zero.
inline double barbell_return(double w_safe, double risky_return) { return (1.0 - w_safe) * risky_return; }

// ---------------------------------------------------------------------------
// Gaussian versus maximum entropy
// ---------------------------------------------------------------------------

struct FrameworkComparison {
    TailConstraints tc;
    GaussianFit gaussian;
    double gaussian_entropy = 0.0;
    FeasibilityResiduals gaussian_residuals;
    MaxentModel case_a;
    double case_a_entropy = 0.0;
    FeasibilityResiduals case_a_residuals;
    /// case_a_entropy - gaussian_entropy.
    double entropy_gap = 0.0;
    /// (eps, nu_-) recovered from the fitted (mu, sigma).
    TailConstraints round_trip;
};

/// The tail constraints fix (mu, sigma) of a Gaussian completely; compares it
/// with the Case A density at the same mean.
inline FrameworkComparison compare_frameworks(const TailConstraints& tc) {
    FrameworkComparison r;
    r.tc = tc;
    r.gaussian = calibrate_gaussian(tc);
    r.gaussian_entropy = gaussian_entropy(r.gaussian.sigma);
    r.gaussian_residuals = feasibility_check(r.gaussian.density(), tc);
    r.case_a = build_case_a(tc, r.gaussian.mu);
    r.case_a_entropy = r.case_a.density.entropy();
    r.case_a_residuals = feasibility_check(r.case_a.density, tc);
    r.entropy_gap = r.case_a_entropy - r.gaussian_entropy;
    r.round_trip = gaussian_tail_constraints(r.gaussian.mu, r.gaussian.sigma, tc.K);
    return r;
}

}  // namespace maxent_tail
