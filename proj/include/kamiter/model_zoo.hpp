#ifndef KAMITER_MODEL_ZOO_HPP
#define KAMITER_MODEL_ZOO_HPP

#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include <kamiter/assumptions.hpp>
#include <kamiter/errors.hpp>
#include <kamiter/series.hpp>

namespace kamiter
{

// Action: the frequency is moved by recentring the actions (h̄ supplies the
// parameter dependence). Parameter: an explicit parameter family xi -> omega(xi)
// on a grid. Direct: one-dimensional closed-form frequency equation.
enum class Route { action, parameter, direct };

enum class Outcome { converges, two_tori, destroyed, no_solution, discontinuous_parameter };

inline const char *to_string(Outcome o)
{
    switch (o) {
    case Outcome::converges:
        return "converges";
    case Outcome::two_tori:
        return "two_tori";
    case Outcome::destroyed:
        return "destroyed";
    case Outcome::no_solution:
        return "no_solution";
    case Outcome::discontinuous_parameter:
        return "discontinuous_parameter";
    }
    return "unknown";
}

struct HamiltonianFamily {
    std::string name;
    int n = 1;
    Route route = Route::action;
    Vector omega;   // target frequency omega(xi0)
    Vector xi0;     // reference parameter (action route: y = 0)
    FrequencyMap fm;
    Series hbar;    // unperturbed degree >= 2 part; empty for parameter families
    // eps * P at parameter xi, as a series
    std::function<Series(std::span<const double> xi, double eps)> perturbation;
    std::function<Outcome(double eps)> expected;
    std::optional<Convexity> convexity; // known (sigma, L) of the frequency map
    std::optional<int> known_degree;
    int th3_case = 0;
    int ell = 0;
};

inline Vector golden_omega()
{
    return {1.0, (std::sqrt(5.0) - 1.0) / 2.0};
}

// gamma = (finite-K Diophantine margin)/2 from a K = 200 scan.
inline double model_gamma(std::span<const double> omega, double tau, int K = 200)
{
    return 0.5 * check_diophantine(omega, DiophantineParams{1.0, tau}, K).margin;
}

namespace detail
{

inline Series power(const Series &a, int p, int cutoff)
{
    Series out(a.dim(), cutoff, 0);
    out.add_term(Monomial{}, 1.0);
    for (int j = 0; j < p; ++j) {
        out = mul(out, a, Cutoffs{cutoff, 0});
    }
    return out;
}

inline Series y_power(int n, int i, int p)
{
    Series out(n, p, 0);
    Monomial m;
    m.iota[i] = p;
    out.add_term(m, 1.0);
    return out;
}

// h̄ gradient as a vector map.
inline VectorMap gradient_map(const Series &hbar, Vector omega)
{
    std::vector<Series> grad;
    for (int i = 0; i < hbar.dim(); ++i) {
        grad.push_back(partial_derivative(hbar, Variable::y(i)));
    }
    return [grad = std::move(grad), omega = std::move(omega)](std::span<const double> y) {
        Vector out = omega;
        const Vector zero(y.size(), 0.0);
        for (std::size_t i = 0; i < grad.size(); ++i) {
            out[i] += evaluate(grad[i], y, zero).real();
        }
        return out;
    };
}

inline FrequencyMap action_frequency_map(const Series &hbar, const Vector &omega, double delta)
{
    FrequencyMap fm;
    fm.dim = hbar.dim();
    fm.domain = Box::centered(Vector(fm.dim, 0.0), delta);
    fm.eval = gradient_map(hbar, omega);
    return fm;
}

} // namespace detail

// h(y) = <omega, y> + |y|^{2l+2}/(2l+2), eps P = eps cos x_1.
inline HamiltonianFamily make_pro2(int l, Vector omega, int n)
{
    if (l < 1) {
        throw InvalidArgument("pro2 needs l >= 1");
    }
    if (static_cast<int>(omega.size()) != n) {
        throw DimensionMismatch("omega length differs from n");
    }
    HamiltonianFamily fam;
    fam.name = "pro2";
    fam.n = n;
    fam.route = Route::action;
    fam.omega = omega;
    fam.xi0.assign(n, 0.0);
    Series q(n, 2, 0);
    for (int i = 0; i < n; ++i) {
        q = add(q, detail::y_power(n, i, 2));
    }
    fam.hbar = scale(detail::power(q, l + 1, 2 * l + 2), 1.0 / (2 * l + 2));
    fam.fm = detail::action_frequency_map(fam.hbar, omega, 1.0);
    // |a|a|^{2l} - b|b|^{2l}| >= 2^{-2l} |a - b|^{2l+1}
    fam.convexity = Convexity{std::pow(2.0, -2 * l), static_cast<double>(2 * l + 1)};
    fam.known_degree = 1;
    fam.perturbation = [n](std::span<const double>, double eps) {
        Series p(n, 0, 1);
        std::vector<int> k(n, 0);
        std::vector<int> iota(n, 0);
        k[0] = 1;
        p.add_term(make_monomial(k, iota), 0.5 * eps);
        k[0] = -1;
        p.add_term(make_monomial(k, iota), 0.5 * eps);
        return p;
    };
    fam.expected = [](double) { return Outcome::converges; };
    return fam;
}

// One-dimensional h(y) = omega y + g(y), eps P = eps y.
// case 1: g = y^{2ell+1}/(2ell+1); case 2: g = y^{2ell+2}/(2ell+2).
inline HamiltonianFamily make_th3(int which, int ell, double omega = 1.0)
{
    if (which != 1 && which != 2) {
        throw InvalidArgument("th3 case must be 1 or 2");
    }
    if (ell < 1) {
        throw InvalidArgument("th3 needs ell >= 1");
    }
    HamiltonianFamily fam;
    fam.name = which == 1 ? "th3_case1" : "th3_case2";
    fam.n = 1;
    fam.route = Route::direct;
    fam.omega = {omega};
    fam.xi0 = {0.0};
    fam.th3_case = which;
    fam.ell = ell;
    const int p = which == 1 ? 2 * ell + 1 : 2 * ell + 2;
    fam.hbar = scale(detail::y_power(1, 0, p), 1.0 / p);
    fam.fm = detail::action_frequency_map(fam.hbar, fam.omega, 1.0);
    fam.known_degree = which == 1 ? 0 : 1;
    fam.perturbation = [](std::span<const double>, double eps) {
        Series s(1, 1, 0);
        s.add_term(make_monomial({0}, {1}), eps);
        return s;
    };
    // Case 1 has g^{(2ell+1)}(0) = (2ell)! > 0, so two tori iff eps < 0.
    fam.expected = [which](double eps) {
        if (which == 2) {
            return Outcome::converges;
        }
        return eps < 0.0 ? Outcome::two_tori : Outcome::destroyed;
    };
    return fam;
}

struct Th3Result {
    Outcome outcome;
    std::vector<double> roots;
};

namespace detail
{

inline double bisect_scalar(const std::function<double(double)> &f, double a, double b)
{
    double fa = f(a);
    while (true) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) {
            return mid;
        }
        const double fm = f(mid);
        if (fm == 0.0) {
            return mid;
        }
        if ((fm > 0.0) == (fa > 0.0)) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
}

} // namespace detail

// Frequency equation g'(y) = -eps P'(y) = -eps on [-1, 1]. The even case is
// split at 0 since its degree on the symmetric interval vanishes even when two
// roots exist.
inline Th3Result solve_th3(const HamiltonianFamily &fam, double eps)
{
    if (fam.route != Route::direct) {
        throw InvalidArgument("solve_th3 needs a th3 family");
    }
    const int p = fam.th3_case == 1 ? 2 * fam.ell : 2 * fam.ell + 1;
    const std::function<double(double)> G = [p, eps](double y) { return std::pow(y, p) + eps; };
    std::vector<std::pair<double, double>> brackets;
    if (fam.th3_case == 1) {
        brackets = {{-1.0, 0.0}, {0.0, 1.0}};
    } else {
        brackets = {{-1.0, 1.0}};
    }
    Th3Result out{Outcome::destroyed, {}};
    for (auto [a, b] : brackets) {
        const double fa = G(a);
        const double fb = G(b);
        if (fa == 0.0) {
            out.roots.push_back(a);
        } else if (fb == 0.0) {
            out.roots.push_back(b);
        } else if ((fa > 0.0) != (fb > 0.0)) {
            out.roots.push_back(detail::bisect_scalar(G, a, b));
        }
    }
    if (out.roots.size() >= 2) {
        out.outcome = Outcome::two_tori;
    } else if (out.roots.size() == 1) {
        out.outcome = Outcome::converges;
    }
    return out;
}

inline double pro1_p0(double eps, int ell)
{
    return eps == 0.0 ? 0.0 : std::pow(eps, ell) * std::sin(1.0 / eps);
}

// omega_2 of the plateau counterexample.
inline double pro1_omega2(double xi2, double omega2_bar)
{
    if (xi2 < -0.5) {
        return omega2_bar + std::exp(-1.0 / ((xi2 + 0.5) * (xi2 + 0.5)));
    }
    if (xi2 > 0.5) {
        return omega2_bar - std::exp(-1.0 / ((xi2 - 0.5) * (xi2 - 0.5)));
    }
    return omega2_bar;
}

// Two-parameter family with omega_1 = omega1_bar + xi_1 and a flat plateau in
// omega_2; eps P = P0(eps) y_2.
inline HamiltonianFamily make_pro1(int ell, Vector omega_bar = golden_omega())
{
    if (ell < 1) {
        throw InvalidArgument("pro1 needs ell >= 1");
    }
    HamiltonianFamily fam;
    fam.name = "pro1";
    fam.n = 2;
    fam.route = Route::parameter;
    fam.omega = omega_bar;
    fam.xi0 = {0.0, 0.0};
    fam.ell = ell;
    fam.hbar = Series(2, 2, 0);
    fam.fm.dim = 2;
    fam.fm.domain = Box{{-1.0, -1.0}, {1.0, 1.0}};
    fam.fm.eval = [omega_bar](std::span<const double> xi) {
        return Vector{omega_bar[0] + xi[0], pro1_omega2(xi[1], omega_bar[1])};
    };
    fam.known_degree = 1;
    fam.perturbation = [ell](std::span<const double>, double eps) {
        Series s(2, 1, 0);
        s.add_term(make_monomial({0, 0}, {0, 1}), pro1_p0(eps, ell));
        return s;
    };
    fam.expected = [](double) { return Outcome::discontinuous_parameter; };
    return fam;
}

// h(y) = omega y + y^{2ell+1}/(2ell+1), eps P = eps y; h''(0) = 0 and the
// degree of h' - h'(0) at 0 vanishes.
inline HamiltonianFamily make_cor1(int ell, double omega = 1.0)
{
    if (ell < 1) {
        throw InvalidArgument("cor1 needs ell >= 1");
    }
    HamiltonianFamily fam;
    fam.name = "cor1";
    fam.n = 1;
    fam.route = Route::action;
    fam.omega = {omega};
    fam.xi0 = {0.0};
    fam.ell = ell;
    const int p = 2 * ell + 1;
    fam.hbar = scale(detail::y_power(1, 0, p), 1.0 / p);
    fam.fm = detail::action_frequency_map(fam.hbar, fam.omega, 1.0);
    fam.known_degree = 0;
    fam.perturbation = [](std::span<const double>, double eps) {
        Series s(1, 1, 0);
        s.add_term(make_monomial({0}, {1}), eps);
        return s;
    };
    fam.expected = [](double eps) { return eps > 0.0 ? Outcome::no_solution : Outcome::two_tori; };
    return fam;
}

// {omega: [...], hbar_terms: [...], perturbation_terms: [...]}; terms use the
// series term layout {k, iota, re, im}. The perturbation is scaled by eps.
inline HamiltonianFamily make_custom(const nlohmann::json &j)
{
    HamiltonianFamily fam;
    try {
        fam.name = j.value("name", std::string("custom"));
        fam.omega = j.at("omega").get<Vector>();
        fam.n = static_cast<int>(fam.omega.size());
        auto read_terms = [&](const char *key) {
            int taylor = 0;
            int fourier = 0;
            std::vector<std::pair<Monomial, Complex>> terms;
            for (const auto &t : j.value(key, nlohmann::json::array())) {
                const auto k = t.at("k").get<std::vector<int>>();
                const auto iota = t.at("iota").get<std::vector<int>>();
                if (static_cast<int>(k.size()) != fam.n) {
                    throw DimensionMismatch(std::string(key) + " term has wrong dimension");
                }
                const Monomial m = make_monomial(k, iota);
                taylor = std::max(taylor, m.taylor_degree());
                fourier = std::max(fourier, m.fourier_order());
                terms.emplace_back(m, Complex(t.at("re").get<double>(), t.value("im", 0.0)));
            }
            Series s(fam.n, taylor, fourier);
            for (const auto &[m, c] : terms) {
                s.add_term(m, c);
            }
            return s;
        };
        fam.hbar = read_terms("hbar_terms");
        const Series P = read_terms("perturbation_terms");
        fam.perturbation = [P](std::span<const double>, double eps) { return scale(P, eps); };
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(std::string("custom model: ") + e.what());
    }
    if (fam.n < 1 || fam.n > 2) {
        throw ConfigError("custom model: omega must have 1 or 2 entries");
    }
    for (const auto &[m, c] : fam.hbar.terms()) {
        if (!m.is_average() || m.taylor_degree() < 2) {
            throw ConfigError("custom model: hbar terms need k = 0 and |iota| >= 2");
        }
    }
    fam.route = Route::action;
    fam.xi0.assign(fam.n, 0.0);
    fam.fm = detail::action_frequency_map(fam.hbar, fam.omega, 1.0);
    fam.expected = [](double) { return Outcome::converges; };
    return fam;
}

struct ModelParams {
    int l = 1;
    int ell = 1;
    int th3_case = 1;
    std::string custom_path;
};

inline std::vector<std::string> model_names()
{
    return {"pro2", "th3_case1", "th3_case2", "pro1", "cor1", "custom"};
}

inline HamiltonianFamily make_model(const std::string &name, const ModelParams &p = {})
{
    if (name == "pro2") {
        return make_pro2(p.l, golden_omega(), 2);
    }
    if (name == "th3_case1") {
        return make_th3(1, p.ell);
    }
    if (name == "th3_case2") {
        return make_th3(2, p.ell);
    }
    if (name == "th3") {
        return make_th3(p.th3_case, p.ell);
    }
    if (name == "pro1") {
        return make_pro1(p.ell);
    }
    if (name == "cor1") {
        return make_cor1(p.ell);
    }
    if (name == "custom") {
        std::ifstream in(p.custom_path);
        if (!in) {
            throw ConfigError("custom model: cannot open '" + p.custom_path + "'");
        }
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception &e) {
            throw ConfigError(std::string("custom model: ") + e.what());
        }
        return make_custom(j);
    }
    throw ConfigError("unknown model '" + name + "'");
}

} // namespace kamiter

#endif // KAMITER_MODEL_ZOO_HPP
