#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include <kamiter/frequency_matching.hpp>
#include <kamiter/model_zoo.hpp>
#include <support/random_series.hpp>

using namespace kamiter;

namespace
{

FrequencyMap map_1d(std::function<double(double)> f)
{
    FrequencyMap fm;
    fm.dim = 1;
    fm.domain = Box{{-1.0}, {1.0}};
    fm.eval = [f](std::span<const double> p) { return Vector{f(p[0])}; };
    return fm;
}

std::vector<Vector> constant_drift(const ParameterGrid &g, Vector v)
{
    return std::vector<Vector>(g.nodes.size(), v);
}

} // namespace

TEST(ParameterGrid, Layout)
{
    const ParameterGrid g = ParameterGrid::make({0.0, 0.0}, 1.0, 5);
    EXPECT_EQ(g.nodes.size(), 25u);
    EXPECT_EQ(g.xi(), (Vector{0.0, 0.0}));
    EXPECT_DOUBLE_EQ(g.spacing(), 0.5);
    EXPECT_EQ(g.nodes[1], (Vector{-1.0, -0.5}));
    EXPECT_EQ(g.cross_nodes().size(), 9u);
    EXPECT_THROW(ParameterGrid::make({0.0}, 1.0, 8), InvalidArgument);
    EXPECT_THROW(ParameterGrid::make({0.0, 0.0, 0.0}, 1.0, 5), UnsupportedDimension);
}

TEST(ParameterGrid, InterpolationIsExactForBilinear)
{
    const ParameterGrid g = ParameterGrid::make({0.0, 0.0}, 1.0, 5);
    std::vector<Vector> vals;
    for (const auto &p : g.nodes) {
        vals.push_back({1.0 + 2.0 * p[0] - p[1] + 0.5 * p[0] * p[1]});
    }
    const Vector xi{0.3, -0.7};
    EXPECT_NEAR(interpolate(g, vals, xi)[0], 1.0 + 0.6 + 0.7 - 0.5 * 0.21, 1e-15);
}

TEST(SolveFrequency, ZeroDriftReturnsStart)
{
    const FrequencyMap fm = map_1d([](double x) { return 2.0 * x + 0.1 * x * x * x; });
    const ParameterGrid g = ParameterGrid::make({0.0}, 1.0, 9);
    const Vector target = fm.eval(g.xi());
    const auto sol = solve_frequency_equation(fm, constant_drift(g, {0.0}), target, g, 1e-12);
    EXPECT_EQ(sol.xi_plus, g.xi());
    EXPECT_EQ(sol.residual, 0.0);
}

TEST(SolveFrequency, DegenerateCubic)
{
    const FrequencyMap fm = map_1d([](double x) { return x * x * x; });
    const ParameterGrid g = ParameterGrid::make({0.0}, 1.0, 9);
    const Vector target{0.0};
    const auto sol = solve_frequency_equation(fm, constant_drift(g, {1e-6}), target, g, 1e-13);
    EXPECT_NEAR(sol.xi_plus[0], -0.01, 1e-12);
    EXPECT_LE(sol.residual, 1e-15);
    EXPECT_EQ(sol.degree, 1);
}

TEST(SolveFrequency, EvenMapHasNoRoot)
{
    const FrequencyMap fm = map_1d([](double x) { return x * x; });
    const ParameterGrid g = ParameterGrid::make({0.0}, 1.0, 9);
    const Vector target{0.0};
    EXPECT_THROW(solve_frequency_equation(fm, constant_drift(g, {1e-4}), target, g, 1e-12), DegreeVanished);
}

TEST(SolveFrequency, PlateauRootOnUpperSide)
{
    // sin(1/eps) = +1 and |P0| below e^{-4}, the largest plateau drop in the box.
    const double eps = 1.0 / (std::numbers::pi / 2.0 + 18.0 * std::numbers::pi);
    const double p0 = pro1_p0(eps, 1);
    ASSERT_NEAR(p0, eps, 1e-15);
    ASSERT_LT(p0, std::exp(-4.0));
    const HamiltonianFamily fam = make_pro1(1);
    const ParameterGrid g = ParameterGrid::make({0.0, 0.0}, 1.0, 9);
    const auto sol = solve_frequency_equation(fam.fm, constant_drift(g, {0.0, p0}), fam.omega, g, 1e-12);
    EXPECT_GT(sol.xi_plus[1], 0.5);
    EXPECT_LT(sol.xi_plus[1], 1.0);
    EXPECT_NEAR(sol.xi_plus[0], 0.0, 1e-12);
    // closed form: xi_2 = 1/2 + 1/sqrt(log(1/P0))
    EXPECT_NEAR(sol.xi_plus[1], 0.5 + 1.0 / std::sqrt(std::log(1.0 / p0)), 1e-11);
}

TEST(SolveFrequency, PlateauWithLargeDriftHasNoRootInBox)
{
    const double eps = 1.0 / (std::numbers::pi / 2.0 + std::numbers::pi);
    const HamiltonianFamily fam = make_pro1(1);
    const ParameterGrid g = ParameterGrid::make({0.0, 0.0}, 1.0, 9);
    try {
        solve_frequency_equation(fam.fm, constant_drift(g, {0.0, pro1_p0(eps, 1)}), fam.omega, g, 1e-12);
        FAIL() << "expected no root";
    } catch (const Error &e) {
        EXPECT_TRUE(e.infeasible());
    }
}

TEST(AdvanceParameter, NoOpAndSnap)
{
    const ParameterGrid g = ParameterGrid::make({0.0, 0.0}, 1.0, 5);
    const ParameterGrid same = advance_parameter(g, g.xi());
    EXPECT_EQ(same.current, g.current);
    EXPECT_EQ(same.last_snap, 0.0);
    EXPECT_EQ(same.last_displacement, 0.0);

    const Vector xi{0.3, -0.6};
    const ParameterGrid moved = advance_parameter(g, xi);
    EXPECT_EQ(moved.xi(), (Vector{0.5, -0.5}));
    EXPECT_NEAR(moved.last_snap, std::hypot(0.2, 0.1), 1e-15);
    EXPECT_NEAR(moved.last_displacement, std::hypot(0.3, 0.6), 1e-15);
    EXPECT_THROW(advance_parameter(g, Vector{1.5, 0.0}), OutsideSearchBox);
}

TEST(RootFinding, OneDimensionalMatchesScalarBisection)
{
    std::mt19937_64 rng(kamiter::testing::kSeed);
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    for (int t = 0; t < 20; ++t) {
        const double root = u(rng);
        const VectorMap G = [root](std::span<const double> x) {
            return Vector{std::atan(x[0] - root) + 0.1 * (x[0] - root)};
        };
        const double tol = 1e-12;
        const RootResult r = find_root_by_degree(G, Box{{-1.0}, {1.0}}, tol);
        // scalar bisection reference
        double a = -1.0;
        double b = 1.0;
        while (b - a >= tol) {
            const double mid = 0.5 * (a + b);
            if (G(Vector{mid})[0] == 0.0) {
                a = b = mid;
                break;
            }
            (G(Vector{mid})[0] < 0.0 ? a : b) = mid;
        }
        EXPECT_EQ(r.xi[0], 0.5 * (a + b));
        EXPECT_LE(r.levels, static_cast<int>(std::ceil(std::log2(2.0 / tol))) + 1);
    }
}

TEST(RootFinding, TwoDimensionalTerminates)
{
    std::mt19937_64 rng(kamiter::testing::kSeed + 1);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    for (int t = 0; t < 10; ++t) {
        const double a = u(rng);
        const double b = u(rng);
        const VectorMap G = [a, b](std::span<const double> x) {
            const double dx = x[0] - a;
            const double dy = x[1] - b;
            return Vector{dx * (dx * dx + dy * dy) + 0.01 * dx, dy * (dx * dx + dy * dy) + 0.01 * dy};
        };
        const double tol = 1e-10;
        const RootResult r = find_root_by_degree(G, Box{{-1.0, -1.0}, {1.0, 1.0}}, tol);
        EXPECT_EQ(r.degree, 1);
        EXPECT_LE(std::hypot(r.xi[0] - a, r.xi[1] - b), tol);
        EXPECT_LE(r.levels, 2 * static_cast<int>(std::ceil(std::log2(2.0 * std::sqrt(2.0) / tol))));
    }
}

TEST(RootFinding, SubBoxDegreesAddUp)
{
    std::mt19937_64 rng(kamiter::testing::kSeed + 2);
    std::uniform_real_distribution<double> u(-0.7, 0.7);
    for (int t = 0; t < 20; ++t) {
        const double a = u(rng);
        const double b = u(rng);
        // z^2 - c with two simple roots, degree 2 on the big box.
        const VectorMap G = [a, b](std::span<const double> x) {
            return Vector{x[0] * x[0] - x[1] * x[1] - a, 2.0 * x[0] * x[1] - b};
        };
        const Box big{{-1.3, -1.1}, {1.2, 1.4}};
        const int parent = adaptive_box_degree(G, big);
        int sum = 0;
        const double sx = 0.5 * (big.lo[0] + big.hi[0]) + 0.0123;
        const double sy = 0.5 * (big.lo[1] + big.hi[1]) - 0.0217;
        for (const Box &q : {Box{{big.lo[0], big.lo[1]}, {sx, sy}}, Box{{sx, big.lo[1]}, {big.hi[0], sy}},
                             Box{{big.lo[0], sy}, {sx, big.hi[1]}}, Box{{sx, sy}, {big.hi[0], big.hi[1]}}}) {
            sum += adaptive_box_degree(G, q);
        }
        EXPECT_EQ(parent, 2);
        EXPECT_EQ(sum, parent);
    }
}
