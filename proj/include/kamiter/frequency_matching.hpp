#ifndef KAMITER_FREQUENCY_MATCHING_HPP
#define KAMITER_FREQUENCY_MATCHING_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <kamiter/assumptions.hpp>
#include <kamiter/errors.hpp>

namespace kamiter
{

// Tensor grid of g points per axis on [center - radius, center + radius]^n.
// Node index is row-major with the last axis fastest. The grid is fixed for a
// whole run; only the current marker moves.
struct ParameterGrid {
    Vector center;
    double radius = 0.0;
    int g = 9;
    std::vector<Vector> nodes;
    int current = 0;
    double last_displacement = 0.0;
    double last_snap = 0.0;

    int dim() const noexcept
    {
        return static_cast<int>(center.size());
    }
    Box box() const
    {
        return Box::centered(center, radius);
    }
    double spacing() const
    {
        return 2.0 * radius / (g - 1);
    }
    const Vector &xi() const
    {
        return nodes[current];
    }
    int center_index() const
    {
        int idx = 0;
        for (int i = 0; i < dim(); ++i) {
            idx = idx * g + g / 2;
        }
        return idx;
    }

    static ParameterGrid make(Vector center, double radius, int g)
    {
        if (g < 3 || g % 2 == 0) {
            throw InvalidArgument("grid size must be odd and at least 3");
        }
        if (!(radius > 0.0)) {
            throw InvalidArgument("grid radius must be positive");
        }
        if (center.empty() || center.size() > 2) {
            throw UnsupportedDimension("parameter grids are implemented for n <= 2");
        }
        ParameterGrid grid;
        grid.center = std::move(center);
        grid.radius = radius;
        grid.g = g;
        const int n = grid.dim();
        int total = 1;
        for (int i = 0; i < n; ++i) {
            total *= g;
        }
        for (int idx = 0; idx < total; ++idx) {
            Vector p(n);
            int rest = idx;
            for (int i = n - 1; i >= 0; --i) {
                p[i] = grid.center[i] - radius + (rest % g) * grid.spacing();
                rest /= g;
            }
            grid.nodes.push_back(std::move(p));
        }
        grid.current = grid.center_index();
        return grid;
    }

    // Nodes on the row and column through the center (2g - 1 in 2-D, g in 1-D).
    std::vector<int> cross_nodes() const
    {
        std::vector<int> out;
        const int c = g / 2;
        if (dim() == 1) {
            for (int i = 0; i < g; ++i) {
                out.push_back(i);
            }
            return out;
        }
        for (int i = 0; i < g; ++i) {
            out.push_back(c * g + i);
        }
        for (int i = 0; i < g; ++i) {
            if (i != c) {
                out.push_back(i * g + c);
            }
        }
        return out;
    }
};

// Piecewise (multi)linear interpolation of node values at xi.
inline Vector interpolate(const ParameterGrid &grid, std::span<const Vector> values, std::span<const double> xi)
{
    const int n = grid.dim();
    if (static_cast<int>(values.size()) != static_cast<int>(grid.nodes.size())) {
        throw DimensionMismatch("one value per grid node required");
    }
    std::array<int, 2> cell{};
    std::array<double, 2> t{};
    for (int i = 0; i < n; ++i) {
        const double u = (xi[i] - (grid.center[i] - grid.radius)) / grid.spacing();
        const int c = std::clamp(static_cast<int>(std::floor(u)), 0, grid.g - 2);
        cell[i] = c;
        t[i] = std::clamp(u - c, 0.0, 1.0);
    }
    const std::size_t width = values.front().size();
    Vector out(width, 0.0);
    const int corners = 1 << n;
    for (int mask = 0; mask < corners; ++mask) {
        double w = 1.0;
        int idx = 0;
        for (int i = 0; i < n; ++i) {
            const int bit = (mask >> i) & 1;
            w *= bit ? t[i] : 1.0 - t[i];
            idx = idx * grid.g + cell[i] + bit;
        }
        if (w == 0.0) {
            continue;
        }
        for (std::size_t j = 0; j < width; ++j) {
            out[j] += w * values[idx][j];
        }
    }
    return out;
}

struct RootResult {
    Vector xi;
    double residual;
    int degree;
    int levels;
};

namespace detail
{

inline std::vector<Box> quadrisect(const Box &b, double ratio)
{
    const double sx = b.lo[0] + ratio * (b.hi[0] - b.lo[0]);
    const double sy = b.lo[1] + ratio * (b.hi[1] - b.lo[1]);
    return {Box{{b.lo[0], b.lo[1]}, {sx, sy}}, Box{{sx, b.lo[1]}, {b.hi[0], sy}}, Box{{b.lo[0], sy}, {sx, b.hi[1]}},
            Box{{sx, sy}, {b.hi[0], b.hi[1]}}};
}

} // namespace detail

// Zero of G inside `box` by degree-guided subdivision. 1-D: bracketing
// bisection. 2-D: quadrisection, descending into the first sub-box with
// nonzero degree. A sub-box whose boundary passes through a zero is avoided by
// moving the split point off center.
inline RootResult find_root_by_degree(const VectorMap &G, const Box &box, double tol)
{
    if (!(tol > 0.0)) {
        throw InvalidArgument("root tolerance must be positive");
    }
    const int n = box.dim();
    {
        const Vector c = box.center();
        const Vector gc = G(c);
        if (norm2(gc) == 0.0) {
            int deg = 0;
            try {
                deg = adaptive_box_degree(G, box);
            } catch (const BoundaryTooClose &) {
            }
            return {c, 0.0, deg, 0};
        }
    }
    if (n == 1) {
        double a = box.lo[0];
        double b = box.hi[0];
        double fa = G(Vector{a})[0];
        const double fb = G(Vector{b})[0];
        if (fa == 0.0 || fb == 0.0) {
            throw OutsideSearchBox("zero on the search interval endpoint");
        }
        const int deg = (detail::sign(fb) - detail::sign(fa)) / 2;
        if (deg == 0) {
            throw DegreeVanished("degree 0 on [" + num(a) + ", " + num(b) + "]: no real solution");
        }
        int levels = 0;
        while (b - a >= tol) {
            const double mid = 0.5 * (a + b);
            if (mid <= a || mid >= b) {
                break;
            }
            const double fm = G(Vector{mid})[0];
            ++levels;
            if (fm == 0.0) {
                return {Vector{mid}, 0.0, deg, levels};
            }
            if (detail::sign(fm) == detail::sign(fa)) {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        const Vector x{0.5 * (a + b)};
        return {x, std::abs(G(x)[0]), deg, levels};
    }
    if (n != 2) {
        throw UnsupportedDimension("root finding is implemented for n <= 2");
    }
    int deg = 0;
    try {
        deg = adaptive_box_degree(G, box);
    } catch (const BoundaryTooClose &) {
        throw OutsideSearchBox("zero on or near the boundary of the search box");
    }
    if (deg == 0) {
        throw DegreeVanished("degree 0 on the search box: no solution located");
    }
    Box cur = box;
    int levels = 0;
    constexpr int kMaxLevels = 200;
    while (cur.diameter() >= tol && levels < kMaxLevels) {
        bool advanced = false;
        for (int attempt = 0; attempt < 9 && !advanced; ++attempt) {
            const double ratio = 0.5 + 0.0618 * ((attempt + 1) / 2) * (attempt % 2 ? 1.0 : -1.0);
            std::vector<Box> parts = detail::quadrisect(cur, ratio);
            try {
                for (const Box &p : parts) {
                    if (adaptive_box_degree(G, p) != 0) {
                        cur = p;
                        advanced = true;
                        break;
                    }
                }
            } catch (const BoundaryTooClose &) {
                continue;
            }
            if (!advanced) {
                throw DegreeVanished("no sub-box with nonzero degree at level " + num(levels));
            }
        }
        if (!advanced) {
            break;
        }
        ++levels;
    }
    const Vector x = cur.center();
    return {x, norm2(G(x)), deg, levels};
}

struct FrequencySolution {
    Vector xi_plus;
    double residual;
    int degree;
};

// Solves omega(xi) + drift(xi) = target on the grid box, drift interpolated
// from per-node values.
inline FrequencySolution solve_frequency_equation(const FrequencyMap &fm, std::span<const Vector> drift,
                                                  std::span<const double> target, const ParameterGrid &grid,
                                                  double tol)
{
    const Vector tgt(target.begin(), target.end());
    const std::vector<Vector> d(drift.begin(), drift.end());
    VectorMap G = [&](std::span<const double> xi) {
        Vector v = fm.eval(xi);
        const Vector dv = interpolate(grid, d, xi);
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] += dv[i] - tgt[i];
        }
        return v;
    };
    const RootResult root = find_root_by_degree(G, grid.box(), tol);
    return {root.xi, root.residual, root.degree};
}

// Moves the current marker to the node nearest xi_plus. Records the
// displacement |xi_plus - xi| and the snap distance.
inline ParameterGrid advance_parameter(const ParameterGrid &grid, std::span<const double> xi_plus)
{
    if (!grid.box().contains(xi_plus)) {
        throw OutsideSearchBox("new parameter lies outside the grid box");
    }
    ParameterGrid out = grid;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
        const double d = distance(grid.nodes[i], xi_plus);
        if (d < best) {
            best = d;
            out.current = static_cast<int>(i);
        }
    }
    out.last_displacement = distance(grid.xi(), xi_plus);
    out.last_snap = best;
    return out;
}

} // namespace kamiter

#endif // KAMITER_FREQUENCY_MATCHING_HPP
