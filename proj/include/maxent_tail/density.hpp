#pragma once

// Densities built from analytic pieces, plus the generic machinery (CDF,
// quantile, sampling, entropy, expectations) that the calibrators and the
// maximum-entropy constructions share.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "maxent_tail/errors.hpp"
#include "maxent_tail/random.hpp"
#include "maxent_tail/special_numerics.hpp"

namespace maxent_tail {

struct Atom {
    double location = 0.0;
    double mass = 0.0;
};

/// Anything with a density and a list of points where it fails to be smooth.
template <class D>
concept Density = requires(const D& d, double x) {
    { d.pdf(x) } -> std::convertible_to<double>;
    { d.breakpoints() } -> std::convertible_to<std::vector<double>>;
};

template <class D>
concept HasCdf = requires(const D& d, double x) {
    { d.cdf(x) } -> std::convertible_to<double>;
};

template <class D>
std::optional<Atom> atom_of(const D& d) {
    if constexpr (requires { { d.atom() } -> std::convertible_to<std::optional<Atom>>; }) {
        return d.atom();
    } else {
        return std::nullopt;
    }
}

// ---------------------------------------------------------------------------
// Normal
// ---------------------------------------------------------------------------

struct NormalDensity {
    double mu = 0.0;
    double sigma = 1.0;

    double pdf(double x) const { return std_normal_pdf((x - mu) / sigma) / sigma; }
    double cdf(double x) const { return std_normal_cdf((x - mu) / sigma); }
    double quantile(double p) const { return mu + sigma * std_normal_quantile(p); }
    // Mode and the +-8 sigma shoulders, so quadrature sees narrow spikes.
    std::vector<double> breakpoints() const { return {mu - 8.0 * sigma, mu, mu + 8.0 * sigma}; }
    double mean() const { return mu; }
    double entropy() const { return 0.5 * (1.0 + std::log(2.0 * std::numbers::pi * sigma * sigma)); }
};

// ---------------------------------------------------------------------------
// Analytic segments
// ---------------------------------------------------------------------------

/// Form of a unit-mass piece anchored at the threshold K:
///   ExpLeft      (1/s) exp(-(K-x)/s)                   x < K
///   ExpRight     (1/s) exp(-(x-K)/s)                   x > K
///   TwoSidedExp  lambda/(2-exp(lambda K)) exp(-lambda|x|)  x >= K, K < 0
///   PowerRight   (1+|x|)^-(1+alpha) / C(alpha)          x >= K, K < 0
enum class SegmentForm { ExpLeft, ExpRight, TwoSidedExp, PowerRight };

inline const char* to_string(SegmentForm f) {
    switch (f) {
        case SegmentForm::ExpLeft:
            return "exp_left";
        case SegmentForm::ExpRight:
            return "exp_right";
        case SegmentForm::TwoSidedExp:
            return "two_sided_exp";
        case SegmentForm::PowerRight:
            return "power_right";
    }
    return "unknown";
}

/// Normalizer of the power-law piece, the integral of (1+|x|)^-(1+alpha) over [K, inf).
inline double power_normalizer(double alpha, double K) {
    return (2.0 - std::pow(1.0 - K, -alpha)) / alpha;
}

/// E(log(1+|X|)) under the normalized power-law piece.
inline double power_log_moment(double alpha, double K) {
    const double log_l = std::log1p(-K);
    return 1.0 / alpha - log_l / (2.0 * std::pow(1.0 - K, alpha) - 1.0);
}

/// Normalizer of the two-sided exponential piece, 2 - exp(lambda K).
inline double two_sided_normalizer(double lambda, double K) { return 2.0 - std::exp(lambda * K); }

/// E|X| under the normalized two-sided exponential piece.
inline double two_sided_abs_mean(double lambda, double K) {
    const double e = std::exp(lambda * K);
    return (2.0 - (1.0 - lambda * K) * e) / (lambda * (2.0 - e));
}

struct Segment {
    SegmentForm form = SegmentForm::ExpRight;
    double K = 0.0;
    /// Scale s for the exponential pieces, rate lambda for TwoSidedExp,
    /// tail exponent alpha for PowerRight.
    double param = 1.0;
    double weight = 1.0;

    double lo() const { return form == SegmentForm::ExpLeft ? -kInf : K; }
    double hi() const { return form == SegmentForm::ExpLeft ? K : kInf; }

    /// Unit-mass density.
    double unit_pdf(double x) const {
        switch (form) {
            case SegmentForm::ExpLeft:
                return x < K ? std::exp(-(K - x) / param) / param : 0.0;
            case SegmentForm::ExpRight:
                return x > K ? std::exp(-(x - K) / param) / param : 0.0;
            case SegmentForm::TwoSidedExp:
                return x >= K ? param / two_sided_normalizer(param, K) * std::exp(-param * std::abs(x)) : 0.0;
            case SegmentForm::PowerRight:
                return x >= K ? std::pow(1.0 + std::abs(x), -(1.0 + param)) / power_normalizer(param, K) : 0.0;
        }
        return 0.0;
    }

    /// Unit-mass CDF.
    double unit_cdf(double x) const {
        switch (form) {
            case SegmentForm::ExpLeft:
                return x < K ? std::exp(-(K - x) / param) : 1.0;
            case SegmentForm::ExpRight:
                return x > K ? -std::expm1(-(x - K) / param) : 0.0;
            case SegmentForm::TwoSidedExp: {
                if (x < K) {
                    return 0.0;
                }
                const double eK = std::exp(param * K);
                const double z = 2.0 - eK;
                if (x < 0.0) {
                    return (std::exp(param * x) - eK) / z;
                }
                return (1.0 - eK - std::expm1(-param * x)) / z;
            }
            case SegmentForm::PowerRight: {
                if (x < K) {
                    return 0.0;
                }
                const double a = param;
                const double lk = std::pow(1.0 - K, -a);
                const double c = (2.0 - lk) / a;
                if (x < 0.0) {
                    return ((std::pow(1.0 - x, -a) - lk) / a) / c;
                }
                return ((1.0 - lk) / a - std::expm1(-a * std::log1p(x)) / a) / c;
            }
        }
        return 0.0;
    }

    /// Inverse of unit_cdf for u in (0,1).
    double unit_quantile(double u) const {
        switch (form) {
            case SegmentForm::ExpLeft:
                return K + param * std::log(u);
            case SegmentForm::ExpRight:
                return K - param * std::log1p(-u);
            case SegmentForm::TwoSidedExp: {
                const double eK = std::exp(param * K);
                const double z = 2.0 - eK;
                const double v = u * z;
                if (v < 1.0 - eK) {
                    return std::log(v + eK) / param;
                }
                return -std::log(z * (1.0 - u)) / param;
            }
            case SegmentForm::PowerRight: {
                const double a = param;
                const double lk = std::pow(1.0 - K, -a);
                const double c = (2.0 - lk) / a;
                const double v = u * c;
                const double left_mass = (1.0 - lk) / a;
                if (v < left_mass) {
                    return 1.0 - std::pow(a * v + lk, -1.0 / a);
                }
                return std::pow(a * (c - v), -1.0 / a) - 1.0;
            }
        }
        return 0.0;
    }

    /// Differential entropy of the unit-mass piece.
    double unit_entropy() const {
        switch (form) {
            case SegmentForm::ExpLeft:
            case SegmentForm::ExpRight:
                return 1.0 + std::log(param);
            case SegmentForm::TwoSidedExp:
                return std::log(two_sided_normalizer(param, K) / param) + param * two_sided_abs_mean(param, K);
            case SegmentForm::PowerRight:
                return std::log(power_normalizer(param, K)) + (1.0 + param) * power_log_moment(param, K);
        }
        return 0.0;
    }

    /// Mean of the unit-mass piece; +inf for power laws with alpha <= 1.
    double unit_mean() const {
        switch (form) {
            case SegmentForm::ExpLeft:
                return K - param;
            case SegmentForm::ExpRight:
                return K + param;
            case SegmentForm::TwoSidedExp: {
                const double lam = param;
                const double eK = std::exp(lam * K);
                const double left = -K * eK - (1.0 - eK) / lam;
                return (left + 1.0 / lam) / (2.0 - eK);
            }
            case SegmentForm::PowerRight: {
                const double a = param;
                if (a <= 1.0) {
                    return kInf;
                }
                const double L = 1.0 - K;
                const double left = (1.0 - std::pow(L, -a)) / a - (1.0 - std::pow(L, 1.0 - a)) / (a - 1.0);
                const double right = 1.0 / (a * (a - 1.0));
                return (left + right) / power_normalizer(a, K);
            }
        }
        return 0.0;
    }

    /// Points inside the support where the piece is not smooth.
    std::vector<double> kinks() const {
        if (form == SegmentForm::TwoSidedExp || form == SegmentForm::PowerRight) {
            return {K, 0.0};
        }
        return {K};
    }
};

/// A normalized density made of weighted analytic segments with disjoint
/// supports, plus an optional point atom.
class PiecewiseDensity {
public:
    PiecewiseDensity() = default;

    explicit PiecewiseDensity(std::vector<Segment> segments, std::optional<Atom> atom = std::nullopt)
        : segments_(std::move(segments)), atom_(atom) {
        std::sort(segments_.begin(), segments_.end(),
                  [](const Segment& a, const Segment& b) { return a.lo() < b.lo(); });
        check();
        order_pieces();
    }

    const std::vector<Segment>& segments() const { return segments_; }
    std::optional<Atom> atom() const { return atom_; }

    double pdf(double x) const {
        double v = 0.0;
        for (const auto& s : segments_) {
            v += s.weight * s.unit_pdf(x);
        }
        return v;
    }

    /// P(X <= x), atom included.
    double cdf(double x) const {
        double v = 0.0;
        for (const auto& s : segments_) {
            v += s.weight * s.unit_cdf(x);
        }
        if (atom_ && atom_->location <= x) {
            v += atom_->mass;
        }
        return std::clamp(v, 0.0, 1.0);
    }

    /// Generalized inverse inf{x : cdf(x) >= p}.
    double quantile(double p) const {
        if (!(p > 0.0 && p < 1.0)) {
            throw DomainError("quantile: p must lie in (0,1)");
        }
        double before = 0.0;
        for (const auto& piece : order_) {
            if (p <= before + piece.mass) {
                if (piece.segment < 0) {
                    return atom_->location;
                }
                const double u = (p - before) / piece.mass;
                return segments_[piece.segment].unit_quantile(std::clamp(u, 1e-300, 1.0 - 1e-16));
            }
            before += piece.mass;
        }
        // Rounding left p just above the accumulated mass.
        const auto& last = order_.back();
        return last.segment < 0 ? atom_->location : segments_[last.segment].unit_quantile(1.0 - 1e-16);
    }

    std::vector<double> breakpoints() const {
        std::vector<double> out;
        for (const auto& s : segments_) {
            for (double k : s.kinks()) {
                out.push_back(k);
            }
        }
        if (atom_) {
            out.push_back(atom_->location);
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    double mean() const {
        double m = 0.0;
        for (const auto& s : segments_) {
            m += s.weight * s.unit_mean();
        }
        if (atom_) {
            m += atom_->mass * atom_->location;
        }
        return m;
    }

    double support_lo() const {
        double lo = kInf;
        for (const auto& s : segments_) {
            lo = std::min(lo, s.lo());
        }
        if (atom_) {
            lo = std::min(lo, atom_->location);
        }
        return lo;
    }

    /// Closed-form differential entropy:
    /// sum w_i h(f_i) - sum w_i ln w_i for disjoint pieces.
    double entropy() const {
        if (atom_ && atom_->mass > 0.0) {
            throw DomainError("entropy: differential entropy is undefined for a density with an atom");
        }
        double h = 0.0;
        for (const auto& s : segments_) {
            h += s.weight * s.unit_entropy() - s.weight * std::log(s.weight);
        }
        return h;
    }

    /// Same density moved by `delta`.
    PiecewiseDensity shifted(double delta) const;

private:
    struct Piece {
        int segment;  // -1 for the atom
        double location;
        double mass;
    };

    void order_pieces() {
        order_.clear();
        for (std::size_t i = 0; i < segments_.size(); ++i) {
            order_.push_back({static_cast<int>(i), segments_[i].lo(), segments_[i].weight});
        }
        if (atom_ && atom_->mass > 0.0) {
            order_.push_back({-1, atom_->location, atom_->mass});
        }
        // An atom at the shared endpoint of two pieces sorts before the piece
        // that starts there.
        std::stable_sort(order_.begin(), order_.end(), [](const Piece& a, const Piece& b) {
            if (a.location != b.location) {
                return a.location < b.location;
            }
            return a.segment < 0 && b.segment >= 0;
        });
    }

    void check() const {
        double total = atom_ ? atom_->mass : 0.0;
        if (atom_ && !(atom_->mass >= 0.0 && atom_->mass <= 1.0)) {
            throw DomainError("PiecewiseDensity: atom mass outside [0,1]");
        }
        for (std::size_t i = 0; i < segments_.size(); ++i) {
            const auto& s = segments_[i];
            if (!(s.param > 0.0) || !std::isfinite(s.param)) {
                throw DomainError(std::string("PiecewiseDensity: non-positive parameter on ") + to_string(s.form));
            }
            if (!(s.weight > 0.0)) {
                throw DomainError("PiecewiseDensity: non-positive segment weight");
            }
            if ((s.form == SegmentForm::TwoSidedExp || s.form == SegmentForm::PowerRight) && !(s.K < 0.0)) {
                throw DomainError("PiecewiseDensity: two-sided and power pieces require K < 0");
            }
            if (i > 0 && segments_[i - 1].hi() > s.lo()) {
                throw DomainError("PiecewiseDensity: segment supports overlap");
            }
            total += s.weight;
        }
        if (std::abs(total - 1.0) > 1e-12) {
            std::ostringstream msg;
            msg << "PiecewiseDensity: weights sum to " << total << ", not 1";
            throw DomainError(msg.str());
        }
    }

    std::vector<Segment> segments_;
    std::optional<Atom> atom_;
    std::vector<Piece> order_;
};

inline PiecewiseDensity PiecewiseDensity::shifted(double delta) const {
    std::vector<Segment> segs = segments_;
    for (auto& s : segs) {
        if (s.form == SegmentForm::TwoSidedExp || s.form == SegmentForm::PowerRight) {
            throw DomainError("shifted: pieces anchored at the origin are not translation-covariant");
        }
        s.K += delta;
    }
    std::optional<Atom> a = atom_;
    if (a) {
        a->location += delta;
    }
    return PiecewiseDensity(std::move(segs), a);
}

// ---------------------------------------------------------------------------
// Generic operations over any Density
// ---------------------------------------------------------------------------

/// Pointwise mixture w*a + (1-w)*b.
template <Density A, Density B>
struct Blend {
    A first;
    B second;
    double w = 0.5;

    double pdf(double x) const { return w * first.pdf(x) + (1.0 - w) * second.pdf(x); }
    std::vector<double> breakpoints() const {
        auto out = first.breakpoints();
        const auto more = second.breakpoints();
        out.insert(out.end(), more.begin(), more.end());
        return out;
    }
    std::optional<Atom> atom() const {
        const auto a = atom_of(first);
        const auto b = atom_of(second);
        if (a && b) {
            if (a->location != b->location) {
                throw DomainError("Blend: atoms at distinct locations are not representable");
            }
            return Atom{a->location, w * a->mass + (1.0 - w) * b->mass};
        }
        if (a) {
            return Atom{a->location, w * a->mass};
        }
        if (b) {
            return Atom{b->location, (1.0 - w) * b->mass};
        }
        return std::nullopt;
    }
};

template <Density A, Density B>
Blend<A, B> blend(A a, B b, double w = 0.5) {
    return Blend<A, B>{std::move(a), std::move(b), w};
}

/// Integral of g(x) f(x) over (a, b], split at the density's breakpoints.
/// An atom inside (a, b] contributes g(location) * mass.
template <Density D, class G>
double expectation(const D& d, const G& g, double a, double b, double tol = 1e-12) {
    auto integrand = [&](double x) {
        const double f = d.pdf(x);
        return f == 0.0 ? 0.0 : g(x) * f;
    };
    const auto points = d.breakpoints();
    double v = integrate_split(integrand, a, b, points, tol).value;
    if (const auto at = atom_of(d); at && at->location > a && at->location <= b) {
        v += g(at->location) * at->mass;
    }
    return v;
}

/// Total mass, continuous part plus atom.
template <Density D>
double total_mass(const D& d, double tol = 1e-12) {
    return expectation(d, [](double) { return 1.0; }, -kInf, kInf, tol);
}

/// -integral f ln f by quadrature.
template <Density D>
double entropy_quadrature(const D& d, double tol = 1e-10) {
    if (const auto at = atom_of(d); at && at->mass > 0.0) {
        throw DomainError("entropy: differential entropy is undefined for a density with an atom");
    }
    auto integrand = [&](double x) {
        const double f = d.pdf(x);
        return f > 0.0 ? -f * std::log(f) : 0.0;
    };
    const auto points = d.breakpoints();
    return integrate_split(integrand, -kInf, kInf, points, tol).value;
}

/// n draws by inverse transform, deterministic per seed and independent of
/// the worker count.
template <class D>
    requires requires(const D& d, double p) { { d.quantile(p) } -> std::convertible_to<double>; }
std::vector<double> sample(const D& d, std::size_t n, std::uint64_t seed, unsigned workers = 0) {
    std::vector<double> out(n);
    for_each_block(
        block_count(n),
        [&](std::size_t b) {
            RandomStream rng(derive_seed(seed, b));
            const std::size_t lo = b * kBlockSize;
            const std::size_t hi = std::min(n, lo + kBlockSize);
            for (std::size_t i = lo; i < hi; ++i) {
                out[i] = d.quantile(rng.uniform());
            }
        },
        workers);
    return out;
}

/// Writes (x, pdf, cdf) rows for a uniform grid.
struct DensityRow {
    double x;
    double pdf;
    double cdf;
};

template <class D>
std::vector<DensityRow> tabulate(const D& d, double x_min, double x_max, std::size_t points) {
    if (points < 2 || !(x_min < x_max)) {
        throw DomainError("tabulate: need points >= 2 and x_min < x_max");
    }
    std::vector<DensityRow> rows;
    rows.reserve(points);
    const double step = (x_max - x_min) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) {
        const double x = i + 1 == points ? x_max : x_min + step * static_cast<double>(i);
        rows.push_back({x, d.pdf(x), d.cdf(x)});
    }
    return rows;
}

}  // namespace maxent_tail
