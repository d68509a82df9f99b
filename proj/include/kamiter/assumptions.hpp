#ifndef KAMITER_ASSUMPTIONS_HPP
#define KAMITER_ASSUMPTIONS_HPP

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <kamiter/errors.hpp>

namespace kamiter
{

using Vector = std::vector<double>;
using VectorMap = std::function<Vector(std::span<const double>)>;

inline double norm2(std::span<const double> v)
{
    double s = 0.0;
    for (double a : v) {
        s += a * a;
    }
    return std::sqrt(s);
}

inline double distance(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    return std::sqrt(s);
}

// Axis-aligned box, closed.
struct Box {
    Vector lo;
    Vector hi;

    int dim() const noexcept
    {
        return static_cast<int>(lo.size());
    }
    Vector center() const
    {
        Vector c(lo.size());
        for (std::size_t i = 0; i < lo.size(); ++i) {
            c[i] = 0.5 * (lo[i] + hi[i]);
        }
        return c;
    }
    double diameter() const
    {
        return distance(lo, hi);
    }
    bool contains(std::span<const double> p) const
    {
        for (std::size_t i = 0; i < lo.size(); ++i) {
            if (p[i] < lo[i] || p[i] > hi[i]) {
                return false;
            }
        }
        return true;
    }

    static Box centered(std::span<const double> c, double radius)
    {
        Box b;
        for (double v : c) {
            b.lo.push_back(v - radius);
            b.hi.push_back(v + radius);
        }
        return b;
    }
};

struct Convexity {
    double sigma;
    double L;
};

// Continuous frequency map xi -> omega(xi) on the parameter box O.
struct FrequencyMap {
    int dim = 1;
    Box domain;
    VectorMap eval;
    double holder_index = 0.5;
    std::optional<Convexity> convexity;

    void validate() const
    {
        if (!(holder_index > 0.0 && holder_index < 1.0)) {
            throw InvalidArgument("Hoelder index must lie in (0, 1)");
        }
        if (convexity && !(convexity->L > 0.0 && convexity->L <= holder_index)) {
            throw InvalidArgument("weak convexity requires 0 < L <= beta");
        }
    }
};

struct DiophantineParams {
    double gamma;
    double tau;

    void validate(int n) const
    {
        if (!(gamma > 0.0) || !(tau > n - 1)) {
            throw InvalidArgument("Diophantine parameters need gamma > 0 and tau > n - 1");
        }
    }
};

struct DiophantineReport {
    bool ok;
    double margin;
    std::vector<int> worst_k;
};

// Exhaustive scan of 0 < |k|_1 <= K. Only one of k, -k is visited (first
// nonzero entry positive); ties resolve to the lexicographically smallest k.
// This is a finite-K check only.
inline DiophantineReport check_diophantine(std::span<const double> omega, const DiophantineParams &dp, int K)
{
    if (K < 1) {
        throw InvalidArgument("Diophantine cutoff must be >= 1");
    }
    const int n = static_cast<int>(omega.size());
    std::vector<int> k(n, -K);
    DiophantineReport rep{false, std::numeric_limits<double>::infinity(), {}};
    while (true) {
        int l1 = 0;
        int first = 0;
        for (int v : k) {
            l1 += std::abs(v);
            if (first == 0) {
                first = v;
            }
        }
        if (l1 > 0 && l1 <= K && first > 0) {
            double dot = 0.0;
            for (int i = 0; i < n; ++i) {
                dot += k[i] * omega[i];
            }
            const double value = std::abs(dot) * std::pow(static_cast<double>(l1), dp.tau);
            if (value < rep.margin) {
                rep.margin = value;
                rep.worst_k = k;
            }
        }
        int i = n - 1;
        while (i >= 0 && k[i] == K) {
            k[i] = -K;
            --i;
        }
        if (i < 0) {
            break;
        }
        ++k[i];
    }
    rep.ok = rep.margin > dp.gamma;
    return rep;
}

struct DegreeResult {
    int degree;
    double boundary_margin;
};

namespace detail
{

inline double angle_increment(std::span<const double> a, std::span<const double> b)
{
    return std::atan2(a[0] * b[1] - a[1] * b[0], a[0] * b[0] + a[1] * b[1]);
}

inline Vector shifted(const VectorMap &f, std::span<const double> p, std::span<const double> target)
{
    Vector v = f(p);
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] -= target[i];
    }
    return v;
}

inline int sign(double v)
{
    return (v > 0.0) - (v < 0.0);
}

// Counterclockwise boundary corners of a 2-D box.
inline std::array<Vector, 4> corners(const Box &box)
{
    return {Vector{box.lo[0], box.lo[1]}, Vector{box.hi[0], box.lo[1]}, Vector{box.hi[0], box.hi[1]},
            Vector{box.lo[0], box.hi[1]}};
}

} // namespace detail

// Brouwer degree of f on a box relative to p, from uniform boundary samples.
// n = 1 uses endpoint signs; n = 2 sums signed angle increments of the
// boundary image around p. The minimum |f - p| on the samples must exceed
// `margin_factor` times the largest jump between adjacent samples.
inline DegreeResult brouwer_degree(const VectorMap &f, const Box &box, std::span<const double> p, int samples_per_edge,
                                   double margin_factor = 10.0)
{
    const int n = box.dim();
    if (n == 1) {
        const Vector a = detail::shifted(f, std::span<const double>(box.lo), p);
        const Vector b = detail::shifted(f, std::span<const double>(box.hi), p);
        const double margin = std::min(std::abs(a[0]), std::abs(b[0]));
        if (margin == 0.0) {
            throw BoundaryTooClose("target lies on the image of the interval endpoints");
        }
        return {(detail::sign(b[0]) - detail::sign(a[0])) / 2, margin};
    }
    if (n != 2) {
        throw UnsupportedDimension("Brouwer degree is implemented for n <= 2 only");
    }
    if (samples_per_edge < 2) {
        throw InvalidArgument("need at least two samples per edge");
    }
    const auto c = detail::corners(box);
    std::vector<Vector> values;
    values.reserve(4 * samples_per_edge);
    for (int e = 0; e < 4; ++e) {
        const Vector &from = c[e];
        const Vector &to = c[(e + 1) % 4];
        for (int j = 0; j < samples_per_edge; ++j) {
            const double t = static_cast<double>(j) / samples_per_edge;
            const Vector q{from[0] + t * (to[0] - from[0]), from[1] + t * (to[1] - from[1])};
            values.push_back(detail::shifted(f, q, p));
        }
    }
    double margin = std::numeric_limits<double>::infinity();
    double jump = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const Vector &a = values[i];
        const Vector &b = values[(i + 1) % values.size()];
        margin = std::min(margin, norm2(a));
        jump = std::max(jump, distance(a, b));
        total += detail::angle_increment(a, b);
    }
    if (!(margin > margin_factor * jump)) {
        throw BoundaryTooClose("boundary margin " + num(margin) + " not above " + num(margin_factor)
                               + " x sample jump " + num(jump) + "; refine samples");
    }
    return {static_cast<int>(std::lround(total / (2.0 * std::numbers::pi))), margin};
}

// Degree of f on a box relative to 0 with adaptive boundary refinement: each
// boundary segment is split until the image jump times `jump_factor` is below
// the smaller endpoint modulus. Used by the root finder, where sub-boxes come
// arbitrarily close to a root.
inline int adaptive_box_degree(const VectorMap &f, const Box &box, double jump_factor = 4.0, int max_depth = 48)
{
    const int n = box.dim();
    if (n == 1) {
        const double a = f(box.lo)[0];
        const double b = f(box.hi)[0];
        if (a == 0.0 || b == 0.0) {
            throw BoundaryTooClose("root on interval endpoint");
        }
        return (detail::sign(b) - detail::sign(a)) / 2;
    }
    if (n != 2) {
        throw UnsupportedDimension("Brouwer degree is implemented for n <= 2 only");
    }
    double total = 0.0;
    std::function<void(const Vector &, const Vector &, const Vector &, const Vector &, int)> walk =
        [&](const Vector &p, const Vector &q, const Vector &fp, const Vector &fq, int depth) {
            const double mp = norm2(fp);
            const double mq = norm2(fq);
            if (mp == 0.0 || mq == 0.0) {
                throw BoundaryTooClose("root on box boundary");
            }
            if (jump_factor * distance(fp, fq) < std::min(mp, mq)) {
                total += detail::angle_increment(fp, fq);
                return;
            }
            if (depth >= max_depth) {
                throw BoundaryTooClose("boundary refinement exhausted near a root");
            }
            const Vector mid{0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])};
            const Vector fm = f(mid);
            walk(p, mid, fp, fm, depth + 1);
            walk(mid, q, fm, fq, depth + 1);
        };
    const auto c = detail::corners(box);
    constexpr int kInitialSegments = 8;
    for (int e = 0; e < 4; ++e) {
        const Vector &from = c[e];
        const Vector &to = c[(e + 1) % 4];
        Vector prev = from;
        Vector fprev = f(prev);
        for (int j = 1; j <= kInitialSegments; ++j) {
            const double t = static_cast<double>(j) / kInitialSegments;
            Vector q{from[0] + t * (to[0] - from[0]), from[1] + t * (to[1] - from[1])};
            if (j == kInitialSegments) {
                q = to;
            }
            Vector fq = f(q);
            walk(prev, q, fprev, fq, 0);
            prev = std::move(q);
            fprev = std::move(fq);
        }
    }
    return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

// Degree of f on box relative to p with adaptive boundary refinement. Copes
// with boundary images that stay small but nonzero, where uniform sampling
// would need an impractical number of points.
inline int adaptive_degree(const VectorMap &f, const Box &box, std::span<const double> p)
{
    const Vector target(p.begin(), p.end());
    const VectorMap g = [&f, &target](std::span<const double> q) { return detail::shifted(f, q, target); };
    return adaptive_box_degree(g, box);
}

struct ConvexityFit {
    double sigma;
    double L;
    bool violated;
    std::optional<std::pair<Vector, Vector>> witness;
};

// Fits |omega(a) - omega(b)| >= sigma |a - b|^L over all sample pairs with L
// restricted to {1, ..., L_max}. The chosen L maximizes the smallest pair
// quotient; among equal maxima the largest L wins, since ties arise when the
// binding pair sits at unit distance and carries no information about L.
inline ConvexityFit fit_weak_convexity(const FrequencyMap &fm, std::span<const Vector> samples, int L_max = 9)
{
    if (samples.size() < 2) {
        throw InvalidArgument("fit_weak_convexity needs at least two samples");
    }
    std::vector<Vector> values;
    values.reserve(samples.size());
    for (const auto &s : samples) {
        values.push_back(fm.eval(s));
    }
    std::vector<std::pair<double, double>> pairs; // (|d omega|, |d xi|)
    for (std::size_t a = 0; a < samples.size(); ++a) {
        for (std::size_t b = a + 1; b < samples.size(); ++b) {
            const double dxi = distance(samples[a], samples[b]);
            if (dxi == 0.0) {
                throw InvalidArgument("fit_weak_convexity samples must be distinct");
            }
            const double dw = distance(values[a], values[b]);
            if (dw == 0.0) {
                return {0.0, 0.0, true, std::make_pair(samples[a], samples[b])};
            }
            pairs.emplace_back(dw, dxi);
        }
    }
    ConvexityFit best{-1.0, 1.0, false, std::nullopt};
    for (int L = 1; L <= L_max; ++L) {
        double q = std::numeric_limits<double>::infinity();
        for (const auto &[dw, dxi] : pairs) {
            q = std::min(q, dw / std::pow(dxi, L));
        }
        if (q >= best.sigma * (1.0 - 1e-12)) {
            best.sigma = q;
            best.L = L;
        }
    }
    return best;
}

} // namespace kamiter

#endif // KAMITER_ASSUMPTIONS_HPP
