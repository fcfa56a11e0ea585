#pragma once

// Multi-period aggregation of i.i.d. single-period returns: the closed-form
// characteristic function of the Case A density, its powers (sums) and
// rescaled powers (averages), Fourier inversion back to a density on a grid,
// and Monte Carlo aggregation for any sampleable model.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <sstream>
#include <vector>

#include "maxent_tail/density.hpp"
#include "maxent_tail/errors.hpp"
#include "maxent_tail/maxent.hpp"
#include "maxent_tail/random.hpp"
#include "maxent_tail/stats.hpp"

namespace maxent_tail {

using Complex = std::complex<double>;

/// Psi(t) = E exp(itX) for the Case A density
///   eps * (K - Exp(s_-)) + (1 - eps) * (K + Exp(s_+)),
/// i.e. exp(itK) [eps/(1 + i t s_-) + (1 - eps)/(1 - i t s_+)]
/// with s_- = K - nu_-, s_+ = nu_+ - K.
struct CharacteristicFn {
    double K = -1.0;
    double epsilon = 0.05;
    double nu_minus = -1.5;
    double nu_plus = 0.1;

    double s_minus() const { return K - nu_minus; }
    double s_plus() const { return nu_plus - K; }

    Complex operator()(double t) const {
        if (t == 0.0) {
            return {1.0, 0.0};
        }
        const Complex i{0.0, 1.0};
        const Complex body = epsilon / (1.0 + i * t * s_minus()) + (1.0 - epsilon) / (1.0 - i * t * s_plus());
        return std::polar(1.0, t * K) * body;
    }

    /// eps nu_- + (1 - eps) nu_+.
    double mean() const { return epsilon * nu_minus + (1.0 - epsilon) * nu_plus; }

    double variance() const {
        const double sm = s_minus();
        const double sp = s_plus();
        const double second = epsilon * (sm * sm + nu_minus * nu_minus) + (1.0 - epsilon) * (sp * sp + nu_plus * nu_plus);
        const double m = mean();
        return second - m * m;
    }
};

inline CharacteristicFn characteristic_fn(const MaxentModel& m) {
    if (m.which != MaxentCase::A || !m.derived.nu_plus) {
        throw DomainError("characteristic_fn: closed form exists for Case A models only");
    }
    return {m.tc.K, m.tc.epsilon, m.tc.nu_minus, *m.derived.nu_plus};
}

inline Complex cf_case_a(const MaxentModel& m, double t) { return characteristic_fn(m)(t); }

namespace detail {

inline Complex ipow(Complex z, std::size_t n) {
    Complex acc{1.0, 0.0};
    while (n > 0) {
        if (n & 1U) {
            acc *= z;
        }
        z *= z;
        n >>= 1U;
    }
    return acc;
}

}  // namespace detail

/// Psi(t)^n: characteristic function of the sum of n independent periods.
template <class Cf>
Complex cf_npower(const Cf& cf, std::size_t n, double t) {
    if (n < 1) {
        throw DomainError("cf_npower: n must be >= 1");
    }
    return detail::ipow(cf(t), n);
}

/// Psi(t/n)^n: characteristic function of the average of n periods.
template <class Cf>
Complex cf_average(const Cf& cf, std::size_t n, double t) {
    if (n < 1) {
        throw DomainError("cf_average: n must be >= 1");
    }
    return detail::ipow(cf(t / static_cast<double>(n)), n);
}

/// Sum of n periods as a callable characteristic function.
template <class Cf>
struct NPowerCf {
    Cf base;
    std::size_t n = 1;
    Complex operator()(double t) const { return cf_npower(base, n, t); }
};

template <class Cf>
NPowerCf<Cf> npower(Cf cf, std::size_t n) {
    return {std::move(cf), n};
}

/// Gaussian characteristic function exp(i t mu - sigma^2 t^2 / 2).
struct GaussianCf {
    double mu = 0.0;
    double sigma = 1.0;
    Complex operator()(double t) const {
        return std::polar(std::exp(-0.5 * sigma * sigma * t * t), t * mu);
    }
};

// ---------------------------------------------------------------------------
// Inversion
// ---------------------------------------------------------------------------

struct InversionOptions {
    /// Frequencies beyond the last |Psi| >= cf_floor are dropped.
    double cf_floor = 1e-12;
    /// Hard cap on the frequency range.
    double t_max = 2000.0;
    /// Frequency step; 0 chooses 2 pi / (4 * grid span).
    double dt = 0.0;
    /// Largest accepted |trapezoid integral - 1|.
    double max_defect = 1e-4;
    unsigned workers = 0;
};

struct InversionGrid {
    std::vector<double> x_points;
    std::vector<double> pdf_values;
    double normalization_defect = 0.0;
    /// Points whose negative ringing was clipped to zero, and the most
    /// negative value seen.
    std::size_t clipped = 0;
    double min_raw = 0.0;
    double t_cutoff = 0.0;
};

/// Uniform grid of `points` values on [lo, hi].
inline std::vector<double> uniform_grid(double lo, double hi, std::size_t points) {
    if (points < 2 || !(lo < hi)) {
        throw DomainError("uniform_grid: need points >= 2 and lo < hi");
    }
    std::vector<double> x(points);
    const double h = (hi - lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) {
        x[i] = lo + h * static_cast<double>(i);
    }
    x.back() = hi;
    return x;
}

/// Trapezoid integral of pdf over the grid.
inline double trapezoid(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    }
    return s;
}

/// Cumulative trapezoid, starting at zero on the first grid point.
inline std::vector<double> cumulative_trapezoid(std::span<const double> x, std::span<const double> y) {
    std::vector<double> c(x.size(), 0.0);
    for (std::size_t i = 1; i < x.size(); ++i) {
        c[i] = c[i - 1] + 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    }
    return c;
}

/// f(x) = (1/pi) int_0^T Re[exp(-itx) Psi(t)] dt, by the trapezoid rule in t.
///
/// The frequency range is cut where |Psi| falls below cf_floor, at t_max, and
/// at 0.9 * 2 pi / dx: a function band-limited below 2 pi / dx integrates
/// exactly under the trapezoid rule on the x grid, so the normalization
/// check measures aliasing and grid coverage rather than rule error.
template <class Cf>
InversionGrid invert_cf(const Cf& cf, std::span<const double> x_grid, const InversionOptions& opt = {}) {
    if (x_grid.size() < 2) {
        throw DomainError("invert_cf: grid needs at least two points");
    }
    double max_dx = 0.0;
    for (std::size_t i = 1; i < x_grid.size(); ++i) {
        const double dx = x_grid[i] - x_grid[i - 1];
        if (!(dx > 0.0)) {
            throw DomainError("invert_cf: grid must be strictly increasing");
        }
        max_dx = std::max(max_dx, dx);
    }
    const double span = x_grid.back() - x_grid.front();
    const double dt = opt.dt > 0.0 ? opt.dt : 2.0 * std::numbers::pi / (4.0 * span);
    const double t_cap = std::min(opt.t_max, 0.9 * 2.0 * std::numbers::pi / max_dx);
    const auto n_cap = static_cast<std::size_t>(std::floor(t_cap / dt));

    std::vector<Complex> psi;
    psi.reserve(n_cap + 1);
    std::size_t last_significant = 0;
    for (std::size_t j = 0; j <= n_cap; ++j) {
        const Complex v = cf(dt * static_cast<double>(j));
        psi.push_back(v);
        if (std::abs(v) >= opt.cf_floor) {
            last_significant = j;
        }
    }
    const std::size_t n_t = std::min(n_cap, last_significant + 1);
    psi.resize(n_t + 1);

    InversionGrid out;
    out.x_points.assign(x_grid.begin(), x_grid.end());
    out.pdf_values.assign(x_grid.size(), 0.0);
    out.t_cutoff = dt * static_cast<double>(n_t);

    std::vector<double> raw(x_grid.size());
    constexpr std::size_t chunk = 64;
    for_each_block(
        block_count(x_grid.size(), chunk),
        [&](std::size_t b) {
            const std::size_t lo = b * chunk;
            const std::size_t hi = std::min(x_grid.size(), lo + chunk);
            for (std::size_t k = lo; k < hi; ++k) {
                const double x = x_grid[k];
                const Complex step = std::polar(1.0, -dt * x);
                Complex rot{1.0, 0.0};
                double acc = 0.5 * psi[0].real();
                for (std::size_t j = 1; j <= n_t; ++j) {
                    rot *= step;
                    // Re-anchor the recurrence to stop rounding drift.
                    if ((j & 1023U) == 0) {
                        rot = std::polar(1.0, -dt * static_cast<double>(j) * x);
                    }
                    const double w = j == n_t ? 0.5 : 1.0;
                    acc += w * (rot * psi[j]).real();
                }
                raw[k] = acc * dt / std::numbers::pi;
            }
        },
        opt.workers);

    out.min_raw = 0.0;
    for (std::size_t k = 0; k < raw.size(); ++k) {
        out.min_raw = std::min(out.min_raw, raw[k]);
        if (raw[k] < -1e-9) {
            ++out.clipped;
            out.pdf_values[k] = 0.0;
        } else {
            out.pdf_values[k] = std::max(raw[k], 0.0);
        }
    }
    out.normalization_defect = std::abs(trapezoid(out.x_points, out.pdf_values) - 1.0);
    if (out.normalization_defect > opt.max_defect) {
        std::ostringstream msg;
        msg << "invert_cf: normalization defect " << out.normalization_defect << " exceeds " << opt.max_defect
            << " (grid [" << x_grid.front() << ", " << x_grid.back() << "], " << x_grid.size()
            << " points, t_cutoff=" << out.t_cutoff << ", dt=" << dt << ", clipped=" << out.clipped << ")";
        throw InversionError(msg.str());
    }
    return out;
}

/// Default grid for the n-period sum: mean +- 10 standard deviations.
inline std::vector<double> default_sum_grid(const CharacteristicFn& cf, std::size_t n, std::size_t points = 4096) {
    const double m = cf.mean() * static_cast<double>(n);
    const double sd = std::sqrt(cf.variance() * static_cast<double>(n));
    return uniform_grid(m - 10.0 * sd, m + 10.0 * sd, points);
}

// ---------------------------------------------------------------------------
// Monte Carlo aggregation
// ---------------------------------------------------------------------------

struct AggregateReport {
    std::size_t n = 1;
    std::size_t paths = 0;
    SampleMoments sums;
    SampleMoments averages;
    /// KS distance of the standardized sums against N(0,1).
    double ks_sum_normal = 0.0;
    /// Fraction of single-period draws that landed on the density's atom.
    double atom_mass = 0.0;
};

/// Sums (and averages) of n i.i.d. draws per path. Path blocks draw from
/// substreams derived from (seed, block), so results do not depend on the
/// worker count.
template <class D>
AggregateReport aggregate_mc(const D& d, std::size_t n, std::size_t paths, std::uint64_t seed, unsigned workers = 0) {
    if (n < 1 || paths < 1) {
        throw DomainError("aggregate_mc: n and paths must be >= 1");
    }
    const auto atom = atom_of(d);
    std::vector<double> sums(paths);
    std::vector<std::size_t> atom_hits(block_count(paths), 0);
    for_each_block(
        block_count(paths),
        [&](std::size_t b) {
            RandomStream rng(derive_seed(seed, b));
            const std::size_t lo = b * kBlockSize;
            const std::size_t hi = std::min(paths, lo + kBlockSize);
            std::size_t hits = 0;
            for (std::size_t i = lo; i < hi; ++i) {
                double s = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double x = d.quantile(rng.uniform());
                    if (atom && x == atom->location) {
                        ++hits;
                    }
                    s += x;
                }
                sums[i] = s;
            }
            atom_hits[b] = hits;
        },
        workers);

    AggregateReport r;
    r.n = n;
    r.paths = paths;
    r.sums = sample_moments(sums);
    std::vector<double> avgs(sums);
    for (double& v : avgs) {
        v /= static_cast<double>(n);
    }
    r.averages = sample_moments(avgs);
    r.ks_sum_normal = ks_vs_standard_normal(sums);
    std::size_t hits = 0;
    for (auto h : atom_hits) {
        hits += h;
    }
    r.atom_mass = static_cast<double>(hits) / (static_cast<double>(paths) * static_cast<double>(n));
    return r;
}

inline AggregateReport aggregate_mc(const MaxentModel& m, std::size_t n, std::size_t paths, std::uint64_t seed,
                                    unsigned workers = 0) {
    return aggregate_mc(m.density, n, paths, seed, workers);
}

}  // namespace maxent_tail
