#pragma once

// Gaussian calibration under the tail constraints, the positive-mean
// inequality it implies, the Student-T analogue, a two-normal mixture that
// meets the constraints approximately, and a stop-loss walk simulator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "maxent_tail/constraints.hpp"
#include "maxent_tail/density.hpp"
#include "maxent_tail/errors.hpp"
#include "maxent_tail/random.hpp"
#include "maxent_tail/special_numerics.hpp"
#include "maxent_tail/stats.hpp"

namespace maxent_tail {

/// phi(eta) / (eps * eta) with eta the eps-quantile of N(0,1). Always below -1
/// on (0, 1/2) and tends to -1 as eps -> 0.
inline double b_epsilon(double eps) {
    if (!(eps > 0.0 && eps < 0.5)) {
        throw DomainError("b_epsilon: epsilon must lie in (0, 1/2)");
    }
    const double eta = std_normal_quantile(eps);
    return std_normal_pdf(eta) / (eps * eta);
}

struct GaussianFit {
    double mu = 0.0;
    double sigma = 1.0;
    double b_eps = -1.0;
    double eta_eps = 0.0;

    NormalDensity density() const { return {mu, sigma}; }
};

/// The unique N(mu, sigma^2) meeting both tail constraints. Solves
///   mu + eta sigma = K,   mu - eta B sigma = nu_minus.
inline GaussianFit calibrate_gaussian(const TailConstraints& tc) {
    require_valid(tc);
    GaussianFit fit;
    fit.eta_eps = std_normal_quantile(tc.epsilon);
    fit.b_eps = std_normal_pdf(fit.eta_eps) / (tc.epsilon * fit.eta_eps);
    const double one_plus_b = 1.0 + fit.b_eps;
    fit.mu = (tc.nu_minus + tc.K * fit.b_eps) / one_plus_b;
    fit.sigma = (tc.K - tc.nu_minus) / (fit.eta_eps * one_plus_b);
    return fit;
}

/// Tail constraints implied by N(mu, sigma^2) at threshold K; inverse of
/// calibrate_gaussian.
inline TailConstraints gaussian_tail_constraints(double mu, double sigma, double K) {
    if (!(sigma > 0.0)) {
        throw DomainError("gaussian_tail_constraints: sigma must be positive");
    }
    const double z = (K - mu) / sigma;
    const double eps = std_normal_cdf(z);
    return {K, eps, mu - sigma * std_normal_pdf(z) / eps};
}

struct NoFreeLunch {
    bool positive_mean = false;
    /// |nu_minus| - K B(eps); positive iff the calibrated mean is positive.
    double margin = 0.0;
};

inline NoFreeLunch no_free_lunch(const TailConstraints& tc) {
    require_valid(tc);
    const double margin = std::abs(tc.nu_minus) - tc.K * b_epsilon(tc.epsilon);
    return {margin > 0.0, margin};
}

/// Differential entropy of N(., sigma^2).
inline double gaussian_entropy(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw DomainError("gaussian_entropy: sigma must be positive");
    }
    return 0.5 * (1.0 + std::log(2.0 * std::numbers::pi * sigma * sigma));
}

// ---------------------------------------------------------------------------
// Student-T
// ---------------------------------------------------------------------------

/// Location-scale Student-T with `alpha` degrees of freedom.
struct StudentTDensity {
    double m = 0.0;
    double s = 1.0;
    double alpha = 3.0;

    double pdf(double x) const {
        const double z = (x - m) / s;
        const double log_norm = std::lgamma(0.5 * (alpha + 1.0)) - std::lgamma(0.5 * alpha) -
                                0.5 * std::log(alpha * std::numbers::pi);
        return std::exp(log_norm - 0.5 * (alpha + 1.0) * std::log1p(z * z / alpha)) / s;
    }

    double cdf(double x) const {
        const double z = (x - m) / s;
        const double tail = 0.5 * reg_inc_beta_complement(z * z / (alpha + z * z), 0.5, 0.5 * alpha);
        return z < 0.0 ? tail : 1.0 - tail;
    }

    double quantile(double p) const {
        if (!(p > 0.0 && p < 1.0)) {
            throw DomainError("StudentTDensity::quantile: p must lie in (0,1)");
        }
        if (p == 0.5) {
            return m;
        }
        const double q = std::min(p, 1.0 - p);
        const double x = reg_inc_beta_inv(2.0 * q, 0.5 * alpha, 0.5);
        const double z = std::sqrt(alpha * (1.0 - x) / x);
        return p < 0.5 ? m - s * z : m + s * z;
    }

    std::vector<double> breakpoints() const { return {m}; }
};

/// Scale s with P(T <= K) = eps for a Student-T at location m with tail
/// exponent alpha, found by root search on
///   eps = 1/2 I_{alpha s^2/((K-m)^2 + alpha s^2)}(alpha/2, 1/2).
/// s is proportional to m - K.
inline double student_t_scale(double alpha, const TailConstraints& tc, double m) {
    require_valid(tc);
    if (!(alpha > 0.0)) {
        throw DomainError("student_t_scale: alpha must be positive");
    }
    if (!(m > tc.K)) {
        throw DomainError("student_t_scale: location m must exceed K");
    }
    const double d2 = (tc.K - m) * (tc.K - m);
    // I_x(a, 1/2) = 1 - I_{1-x}(1/2, a) with 1-x = d2 / (d2 + alpha s^2).
    auto excess = [&](double log_s) {
        const double s = std::exp(log_s);
        const double y = d2 / (d2 + alpha * s * s);
        return 0.5 * reg_inc_beta_complement(y, 0.5, 0.5 * alpha) - tc.epsilon;
    };
    const double log_s = find_root(excess, {std::log(1e-12), std::log(1e6)}, 0.0);
    return std::exp(log_s);
}

/// Magnitude of the closed-form ratio s / (m - K). The printed form carries a
/// factor i; its modulus is sqrt(x) / (sqrt(alpha) sqrt(1 - x)) with x the
/// inverse regularized incomplete beta at 2 eps.
inline double student_t_kappa(double alpha, double eps) {
    const double x = reg_inc_beta_inv(2.0 * eps, 0.5 * alpha, 0.5);
    return std::sqrt(x) / (std::sqrt(alpha) * std::sqrt(1.0 - x));
}

// ---------------------------------------------------------------------------
// Two-normal mixture
// ---------------------------------------------------------------------------

/// lambda N(mu1, sigma1^2) + (1 - lambda) N(mu2, sigma2^2).
struct MixtureFit {
    double lambda = 0.0;
    double mu1 = 0.0;
    double mu2 = 0.0;
    double sigma1 = 1.0;
    double sigma2 = 1.0;

    double pdf(double x) const {
        return lambda * std_normal_pdf((x - mu1) / sigma1) / sigma1 +
               (1.0 - lambda) * std_normal_pdf((x - mu2) / sigma2) / sigma2;
    }
    double cdf(double x) const {
        return lambda * std_normal_cdf((x - mu1) / sigma1) + (1.0 - lambda) * std_normal_cdf((x - mu2) / sigma2);
    }
    double quantile(double p) const {
        if (!(p > 0.0 && p < 1.0)) {
            throw DomainError("quantile: p must lie in (0,1)");
        }
        const double lo = std::min(mu1 - 40.0 * sigma1, mu2 - 40.0 * sigma2);
        const double hi = std::max(mu1 + 40.0 * sigma1, mu2 + 40.0 * sigma2);
        return find_root([&](double x) { return cdf(x) - p; }, {lo, hi}, 0.0);
    }
    double mean() const { return lambda * mu1 + (1.0 - lambda) * mu2; }
    std::vector<double> breakpoints() const {
        return {mu1 - 8.0 * sigma1, mu1, mu1 + 8.0 * sigma1, mu2 - 8.0 * sigma2, mu2, mu2 + 8.0 * sigma2};
    }
};

/// Mixture with the left component placed at the shortfall: lambda = eps,
/// mu1 = nu_minus, and mu2 fixed by the overall mean.
inline MixtureFit mixture_two_normals(const TailConstraints& tc, double mu, double sigma1, double sigma2) {
    require_valid(tc);
    if (!(sigma1 > 0.0) || !(sigma2 > 0.0)) {
        throw ConfigError("mixture_two_normals: sigma1 and sigma2 must be positive");
    }
    const double mu2 = (mu - tc.epsilon * tc.nu_minus) / (1.0 - tc.epsilon);
    if (!(mu2 > tc.K)) {
        throw ConfigError("mixture_two_normals: right component mean mu2 <= K");
    }
    return {tc.epsilon, tc.nu_minus, mu2, sigma1, sigma2};
}

// ---------------------------------------------------------------------------
// Stop-loss walk
// ---------------------------------------------------------------------------

struct StopLossParams {
    double drift = 0.0;      ///< mean increment per step
    double vol = 0.01;       ///< increment standard deviation per step
    double K = -0.1;         ///< stop level on the cumulative return
    std::size_t steps = 250;
    std::size_t paths = 100000;
    std::uint64_t seed = kDefaultSeed;
    std::size_t bins = 50;
    unsigned workers = 0;
};

struct HistogramBin {
    double center;
    double frequency;
};

struct StopLossReport {
    /// Fraction of paths stopped out; they sit at exactly K.
    double atom_mass = 0.0;
    /// Mean of the terminal value over all paths, stopped paths at K.
    double terminal_mean = 0.0;
    /// Skewness of the terminal values of paths that were never stopped.
    double terminal_skewness = 0.0;
    double survivor_mean = 0.0;
    double survivor_variance = 0.0;
    /// Survivor terminal values; frequencies are fractions of all paths.
    std::vector<HistogramBin> histogram;
};

/// Cumulative Gaussian walks absorbed at the first step whose value is <= K,
/// executed exactly at K.
inline StopLossReport stoploss_simulate(const StopLossParams& p) {
    if (!(p.vol > 0.0)) {
        throw DomainError("stoploss_simulate: vol must be positive");
    }
    if (p.steps < 1 || p.paths < 1) {
        throw DomainError("stoploss_simulate: steps and paths must be >= 1");
    }
    if (p.bins < 1) {
        throw DomainError("stoploss_simulate: bins must be >= 1");
    }
    std::vector<double> terminal(p.paths);
    std::vector<unsigned char> stopped(p.paths, 0);
    for_each_block(
        block_count(p.paths),
        [&](std::size_t b) {
            RandomStream rng(derive_seed(p.seed, b));
            const std::size_t lo = b * kBlockSize;
            const std::size_t hi = std::min(p.paths, lo + kBlockSize);
            for (std::size_t i = lo; i < hi; ++i) {
                double x = 0.0;
                for (std::size_t k = 0; k < p.steps; ++k) {
                    x += p.drift + p.vol * rng.normal();
                    if (x <= p.K) {
                        x = p.K;
                        stopped[i] = 1;
                        break;
                    }
                }
                terminal[i] = x;
            }
        },
        p.workers);

    StopLossReport r;
    std::vector<double> survivors;
    survivors.reserve(p.paths);
    std::size_t n_stopped = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < p.paths; ++i) {
        sum += terminal[i];
        if (stopped[i]) {
            ++n_stopped;
        } else {
            survivors.push_back(terminal[i]);
        }
    }
    const auto total = static_cast<double>(p.paths);
    r.atom_mass = static_cast<double>(n_stopped) / total;
    r.terminal_mean = sum / total;
    if (!survivors.empty()) {
        const SampleMoments m = sample_moments(survivors);
        r.survivor_mean = m.mean;
        r.survivor_variance = m.variance;
        r.terminal_skewness = m.skewness;

        const auto [lo_it, hi_it] = std::minmax_element(survivors.begin(), survivors.end());
        const double lo = *lo_it;
        const double hi = *hi_it;
        const double width = hi > lo ? (hi - lo) / static_cast<double>(p.bins) : 1.0;
        std::vector<std::size_t> counts(p.bins, 0);
        for (double v : survivors) {
            auto k = static_cast<std::size_t>((v - lo) / width);
            counts[std::min(k, p.bins - 1)] += 1;
        }
        r.histogram.reserve(p.bins);
        for (std::size_t k = 0; k < p.bins; ++k) {
            r.histogram.push_back({lo + (static_cast<double>(k) + 0.5) * width,
                                   static_cast<double>(counts[k]) / total});
        }
    }
    return r;
}

}  // namespace maxent_tail
