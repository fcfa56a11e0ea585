#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "maxent_tail/special_numerics.hpp"

namespace maxent_tail {

struct SampleMoments {
    double mean = 0.0;
    double variance = 0.0;  // unbiased
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
};

/// Two-pass central moments; skewness and kurtosis use population (biased)
/// normalization.
inline SampleMoments sample_moments(std::span<const double> xs) {
    SampleMoments m;
    const auto n = static_cast<double>(xs.size());
    if (xs.empty()) {
        return m;
    }
    double sum = 0.0;
    for (double x : xs) {
        sum += x;
    }
    m.mean = sum / n;
    double m2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;
    for (double x : xs) {
        const double d = x - m.mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m.variance = xs.size() > 1 ? m2 / (n - 1.0) : 0.0;
    const double pop2 = m2 / n;
    if (pop2 > 0.0) {
        m.skewness = (m3 / n) / std::pow(pop2, 1.5);
        m.excess_kurtosis = (m4 / n) / (pop2 * pop2) - 3.0;
    }
    return m;
}

/// One-sample Kolmogorov-Smirnov statistic sup|F_n - F|. Ties are grouped so
/// that a CDF with jumps (atoms) is compared on both sides of each jump.
template <class Cdf>
double ks_statistic(std::vector<double> xs, const Cdf& cdf) {
    if (xs.empty()) {
        return 0.0;
    }
    std::sort(xs.begin(), xs.end());
    const auto n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size();) {
        std::size_t j = i;
        while (j + 1 < xs.size() && xs[j + 1] == xs[i]) {
            ++j;
        }
        const double f = cdf(xs[i]);
        const double f_left = j > i ? cdf(std::nextafter(xs[i], -std::numeric_limits<double>::infinity())) : f;
        d = std::max({d, std::abs(f - static_cast<double>(j + 1) / n), std::abs(f_left - static_cast<double>(i) / n)});
        i = j + 1;
    }
    return d;
}

/// KS distance of the standardized sample against N(0,1).
inline double ks_vs_standard_normal(std::span<const double> xs) {
    const SampleMoments m = sample_moments(xs);
    const double sd = std::sqrt(m.variance);
    std::vector<double> z(xs.begin(), xs.end());
    for (double& v : z) {
        v = sd > 0.0 ? (v - m.mean) / sd : 0.0;
    }
    return ks_statistic(std::move(z), [](double x) { return std_normal_cdf(x); });
}

/// Critical value of the KS statistic at the 1% level, large-n asymptotic.
inline double ks_critical_1pct(std::size_t n) { return 1.63 / std::sqrt(static_cast<double>(n)); }

}  // namespace maxent_tail
