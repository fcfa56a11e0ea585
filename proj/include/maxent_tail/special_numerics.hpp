#pragma once

// Special functions and numeric kernels shared by every other header:
// standard normal pdf/cdf/quantile, the regularized incomplete beta
// function, adaptive Gauss-Kronrod quadrature over (semi-)infinite ranges
// and a bracketing root finder.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <span>
#include <sstream>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "maxent_tail/errors.hpp"

namespace maxent_tail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Default absolute tolerance for quadrature.
inline constexpr double kQuadTol = 1e-10;
/// Default tolerance for root finding.
inline constexpr double kRootTol = 1e-10;

struct Bracket {
    double lo;
    double hi;
};

struct QuadratureResult {
    double value = 0.0;
    double abs_error_estimate = 0.0;
    int intervals = 0;
};

// ---------------------------------------------------------------------------
// Standard normal
// ---------------------------------------------------------------------------

inline double std_normal_pdf(double x) noexcept {
    constexpr double inv_sqrt_2pi = 0.398942280401432677939946059934;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

inline double std_normal_cdf(double x) noexcept {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

namespace detail {

// Acklam's rational approximation, relative error ~1.15e-9.
inline double normal_quantile_initial(double p) noexcept {
    static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02,
                                             -2.759285104469687e+02, 1.383577518672690e+02,
                                             -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02,
                                             -1.556989798598866e+02, 6.680131188771972e+01,
                                             -1.328068155288572e+01};
    static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01,
                                             -2.400758277161838e+00, -2.549732539343734e+00,
                                             4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01,
                                             2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace detail

/// Inverse of std_normal_cdf. Rational initial guess followed by two Newton
/// steps on the CDF; the upper half is handled by symmetry so the Newton
/// residual is always taken against a small probability.
inline double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("std_normal_quantile: p must lie in (0,1)");
    }
    if (p > 0.5) {
        return -std_normal_quantile(1.0 - p);
    }
    if (p == 0.5) {
        return 0.0;
    }
    double x = detail::normal_quantile_initial(p);
    for (int i = 0; i < 2; ++i) {
        const double dens = std_normal_pdf(x);
        if (dens <= 0.0) {
            break;
        }
        x -= (std_normal_cdf(x) - p) / dens;
    }
    return x;
}

// ---------------------------------------------------------------------------
// Regularized incomplete beta
// ---------------------------------------------------------------------------

inline double reg_inc_beta(double x, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw DomainError("reg_inc_beta: shape parameters must be positive");
    }
    if (!(x >= 0.0 && x <= 1.0)) {
        throw DomainError("reg_inc_beta: x must lie in [0,1]");
    }
    if (x == 0.0) {
        return 0.0;
    }
    if (x == 1.0) {
        return 1.0;
    }
    return boost::math::ibeta(a, b, x);
}

/// 1 - I_x(a, b) without cancellation.
inline double reg_inc_beta_complement(double x, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw DomainError("reg_inc_beta_complement: shape parameters must be positive");
    }
    if (!(x >= 0.0 && x <= 1.0)) {
        throw DomainError("reg_inc_beta_complement: x must lie in [0,1]");
    }
    if (x == 0.0) {
        return 1.0;
    }
    if (x == 1.0) {
        return 0.0;
    }
    return boost::math::ibetac(a, b, x);
}

inline double reg_inc_beta_inv(double p, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw DomainError("reg_inc_beta_inv: shape parameters must be positive");
    }
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("reg_inc_beta_inv: p must lie in (0,1)");
    }
    return boost::math::ibeta_inv(a, b, p);
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

struct QuadratureOptions {
    double tol = kQuadTol;
    int max_intervals = 20000;
};

namespace detail {

struct GkSegment {
    double a;
    double b;
    double value;
    double error;
    bool operator<(const GkSegment& other) const { return error < other.error; }
};

// 15-point Kronrod rule with embedded 7-point Gauss rule, QUADPACK error model.
template <class F>
GkSegment gk15(const F& f, double a, double b) {
    static constexpr std::array<double, 8> xgk{
        0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
        0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
    static constexpr std::array<double, 8> wgk{
        0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    static constexpr std::array<double, 4> wg{
        0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
        0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double resk = fc * wgk[7];
    double resg = fc * wg[3];
    double resabs = std::abs(resk);
    std::array<double, 7> f1{};
    std::array<double, 7> f2{};
    for (int j = 0; j < 7; ++j) {
        const double dx = half * xgk[j];
        f1[j] = f(center - dx);
        f2[j] = f(center + dx);
        resk += wgk[j] * (f1[j] + f2[j]);
        resabs += wgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
        if (j % 2 == 1) {
            resg += wg[j / 2] * (f1[j] + f2[j]);
        }
    }
    const double reskh = 0.5 * resk;
    double resasc = wgk[7] * std::abs(fc - reskh);
    for (int j = 0; j < 7; ++j) {
        resasc += wgk[j] * (std::abs(f1[j] - reskh) + std::abs(f2[j] - reskh));
    }
    const double scale = std::abs(half);
    resk *= half;
    resg *= half;
    resabs *= scale;
    resasc *= scale;

    double err = std::abs(resk - resg);
    if (resasc != 0.0 && err != 0.0) {
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    }
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) {
        err = std::max(50.0 * eps * resabs, err);
    }
    return {a, b, resk, err};
}

template <class F>
QuadratureResult adaptive_finite(const F& f, double a, double b, const QuadratureOptions& opt) {
    std::priority_queue<GkSegment> heap;
    GkSegment first = gk15(f, a, b);
    double total = first.value;
    double total_err = first.error;
    heap.push(first);
    int count = 1;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    // Error parked on segments too narrow to split further.
    double frozen_err = 0.0;

    while (total_err > opt.tol && !heap.empty()) {
        if (count >= opt.max_intervals) {
            std::ostringstream msg;
            msg << "integrate: no convergence on [" << a << ", " << b << "] after " << count
                << " intervals; value=" << total << " error_estimate=" << total_err
                << " tol=" << opt.tol;
            throw NumericError(msg.str());
        }
        const GkSegment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b) ||
            std::abs(worst.b - worst.a) <= 4.0 * eps * std::max(std::abs(worst.a), std::abs(worst.b))) {
            frozen_err += worst.error;
            if (frozen_err > opt.tol) {
                std::ostringstream msg;
                msg << "integrate: interval [" << worst.a << ", " << worst.b
                    << "] cannot be refined further; error_estimate=" << total_err;
                throw NumericError(msg.str());
            }
            continue;
        }
        const GkSegment left = gk15(f, worst.a, mid);
        const GkSegment right = gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++count;
    }
    // Re-sum to shed drift from the incremental updates.
    double value = 0.0;
    double error = frozen_err;
    while (!heap.empty()) {
        value += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    return {value, error, count};
}

}  // namespace detail

/// Integrates f over (a, b); either endpoint may be infinite. A semi-infinite
/// range is mapped onto (0, 1] with x = a + (1 - t)/t so that the infinite end
/// sits at t -> 0, where doubles keep full resolution.
template <class F>
QuadratureResult integrate(const F& f, double a, double b, const QuadratureOptions& opt = {}) {
    if (std::isnan(a) || std::isnan(b) || !(a < b)) {
        throw DomainError("integrate: require a < b");
    }
    const bool a_inf = std::isinf(a);
    const bool b_inf = std::isinf(b);
    if (!a_inf && !b_inf) {
        return detail::adaptive_finite(f, a, b, opt);
    }
    if (a_inf && b_inf) {
        QuadratureOptions half = opt;
        half.tol = 0.5 * opt.tol;
        const QuadratureResult lo = integrate(f, -kInf, 0.0, half);
        const QuadratureResult hi = integrate(f, 0.0, kInf, half);
        return {lo.value + hi.value, lo.abs_error_estimate + hi.abs_error_estimate,
                lo.intervals + hi.intervals};
    }
    if (b_inf) {
        auto g = [&f, a](double t) {
            if (t <= 0.0) {
                return 0.0;
            }
            const double v = f(a + (1.0 - t) / t);
            return v == 0.0 ? 0.0 : v / (t * t);
        };
        return detail::adaptive_finite(g, 0.0, 1.0, opt);
    }
    auto g = [&f, b](double t) {
        if (t <= 0.0) {
            return 0.0;
        }
        const double v = f(b - (1.0 - t) / t);
        return v == 0.0 ? 0.0 : v / (t * t);
    };
    return detail::adaptive_finite(g, 0.0, 1.0, opt);
}

template <class F>
QuadratureResult integrate(const F& f, double a, double b, double tol) {
    QuadratureOptions opt;
    opt.tol = tol;
    return integrate(f, a, b, opt);
}

/// Integrates over (a, b) split at the given interior points. Points outside
/// (a, b) are ignored; the tolerance is shared evenly between the pieces.
template <class F>
QuadratureResult integrate_split(const F& f, double a, double b, std::span<const double> points,
                                 const QuadratureOptions& opt = {}) {
    std::vector<double> cuts{a};
    std::vector<double> inner;
    for (double p : points) {
        if (std::isfinite(p) && p > a && p < b) {
            inner.push_back(p);
        }
    }
    std::sort(inner.begin(), inner.end());
    inner.erase(std::unique(inner.begin(), inner.end()), inner.end());
    cuts.insert(cuts.end(), inner.begin(), inner.end());
    cuts.push_back(b);

    QuadratureOptions piece = opt;
    piece.tol = opt.tol / static_cast<double>(cuts.size() - 1);
    QuadratureResult out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const QuadratureResult r = integrate(f, cuts[i], cuts[i + 1], piece);
        out.value += r.value;
        out.abs_error_estimate += r.abs_error_estimate;
        out.intervals += r.intervals;
    }
    return out;
}

template <class F>
QuadratureResult integrate_split(const F& f, double a, double b, std::span<const double> points,
                                 double tol) {
    QuadratureOptions opt;
    opt.tol = tol;
    return integrate_split(f, a, b, points, opt);
}

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

/// Brent's method. `tol` bounds the final bracket width (absolute); pass 0 to
/// iterate down to machine resolution.
template <class F>
double find_root(const F& f, Bracket bracket, double tol = kRootTol, int max_iter = 500) {
    double a = bracket.lo;
    double b = bracket.hi;
    if (!(a < b)) {
        throw BracketError("find_root: bracket requires lo < hi");
    }
    double fa = f(a);
    double fb = f(b);
    if (fa == 0.0) {
        return a;
    }
    if (fb == 0.0) {
        return b;
    }
    if (std::isnan(fa) || std::isnan(fb) || (fa > 0.0) == (fb > 0.0)) {
        std::ostringstream msg;
        msg << "find_root: no sign change over [" << a << ", " << b << "] (f(lo)=" << fa
            << ", f(hi)=" << fb << ")";
        throw BracketError(msg.str());
    }
    constexpr double eps = std::numeric_limits<double>::epsilon();
    double c = a;
    double fc = fa;
    double d = b - a;
    double e = d;
    for (int iter = 0; iter < max_iter; ++iter) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol1 = 2.0 * eps * std::abs(b) + 0.5 * tol;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0) {
            return b;
        }
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            const double s = fb / fa;
            double p;
            double q;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qa = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) {
                q = -q;
            }
            p = std::abs(p);
            const double min1 = 3.0 * xm * q - std::abs(tol1 * q);
            const double min2 = std::abs(e * q);
            if (2.0 * p < std::min(min1, min2)) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
        fb = f(b);
    }
    throw NumericError("find_root: iteration budget exhausted");
}

}  // namespace maxent_tail
