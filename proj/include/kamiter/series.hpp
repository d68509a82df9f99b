#ifndef KAMITER_SERIES_HPP
#define KAMITER_SERIES_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include <kamiter/errors.hpp>

namespace kamiter
{

using Complex = std::complex<double>;

// Largest number of degrees of freedom a series can carry.
inline constexpr int kMaxDim = 4;

// Key of one term c * y^iota * exp(i <k, x>). Unused trailing slots are zero,
// so the defaulted ordering is lexicographic in (k, iota).
struct Monomial {
    std::array<int, kMaxDim> k{};
    std::array<int, kMaxDim> iota{};

    auto operator<=>(const Monomial &) const = default;
    bool operator==(const Monomial &) const = default;

    int fourier_order() const noexcept
    {
        int s = 0;
        for (int v : k) {
            s += std::abs(v);
        }
        return s;
    }
    int taylor_degree() const noexcept
    {
        int s = 0;
        for (int v : iota) {
            s += v;
        }
        return s;
    }
    bool is_average() const noexcept
    {
        return std::all_of(k.begin(), k.end(), [](int v) { return v == 0; });
    }
};

inline Monomial make_monomial(std::span<const int> k, std::span<const int> iota)
{
    if (k.size() != iota.size() || k.size() > static_cast<std::size_t>(kMaxDim)) {
        throw DimensionMismatch("monomial index lengths must agree and not exceed " + num(kMaxDim));
    }
    Monomial m;
    for (std::size_t i = 0; i < k.size(); ++i) {
        if (iota[i] < 0) {
            throw InvalidArgument("Taylor exponents must be nonnegative");
        }
        m.k[i] = k[i];
        m.iota[i] = iota[i];
    }
    return m;
}

inline Monomial make_monomial(std::initializer_list<int> k, std::initializer_list<int> iota)
{
    return make_monomial(std::span<const int>(k.begin(), k.size()), std::span<const int>(iota.begin(), iota.size()));
}

// Coefficients with magnitude below this value are dropped after every
// operation. Default 1e-30.
inline double &prune_threshold()
{
    static double value = 1e-30;
    return value;
}

// Analyticity domain D(s, r): |y| < s, |Im x| < r.
struct Domain {
    double s = 1.0;
    double r = 1.0;

    void validate() const
    {
        if (!(s > 0.0 && s <= 1.0 && r > 0.0 && r <= 1.0)) {
            throw InvalidArgument("domain requires 0 < s <= 1 and 0 < r <= 1");
        }
    }
};

// Truncated Fourier-Taylor series in n action variables y and n angles x.
// Stored terms always satisfy |k|_1 <= fourier_cutoff and
// |iota|_1 <= taylor_cutoff.
class FourierTaylorSeries
{
public:
    using Terms = std::map<Monomial, Complex>;

    FourierTaylorSeries() = default;
    FourierTaylorSeries(int dim, int taylor_cutoff, int fourier_cutoff)
        : dim_(dim), taylor_cutoff_(taylor_cutoff), fourier_cutoff_(fourier_cutoff)
    {
        if (dim < 1 || dim > kMaxDim) {
            throw UnsupportedDimension("series dimension must be in [1, " + num(kMaxDim) + "]");
        }
        if (taylor_cutoff < 0 || fourier_cutoff < 0) {
            throw InvalidArgument("series cutoffs must be nonnegative");
        }
    }

    int dim() const noexcept
    {
        return dim_;
    }
    int taylor_cutoff() const noexcept
    {
        return taylor_cutoff_;
    }
    int fourier_cutoff() const noexcept
    {
        return fourier_cutoff_;
    }
    const Terms &terms() const noexcept
    {
        return terms_;
    }
    bool empty() const noexcept
    {
        return terms_.empty();
    }
    std::size_t size() const noexcept
    {
        return terms_.size();
    }

    bool admits(const Monomial &m) const noexcept
    {
        return m.fourier_order() <= fourier_cutoff_ && m.taylor_degree() <= taylor_cutoff_;
    }

    Complex coeff(const Monomial &m) const
    {
        auto it = terms_.find(m);
        return it == terms_.end() ? Complex{} : it->second;
    }

    // Accumulates c into the term m. Terms outside the cutoffs are silently
    // dropped; the result is pruned.
    FourierTaylorSeries &add_term(const Monomial &m, Complex c)
    {
        if (!admits(m)) {
            return *this;
        }
        auto [it, inserted] = terms_.try_emplace(m, c);
        if (!inserted) {
            it->second += c;
        }
        if (std::abs(it->second) < prune_threshold() || it->second == Complex{}) {
            terms_.erase(it);
        }
        return *this;
    }

    FourierTaylorSeries &add_term(std::initializer_list<int> k, std::initializer_list<int> iota, Complex c)
    {
        return add_term(make_monomial(k, iota), c);
    }

    // Raw insertion used by the algebra; the caller prunes afterwards.
    Complex &raw(const Monomial &m)
    {
        return terms_[m];
    }

    void prune()
    {
        const double eps = prune_threshold();
        std::erase_if(terms_, [eps](const auto &kv) { return std::abs(kv.second) < eps || kv.second == Complex{}; });
    }

    // Same terms under new cutoffs; terms outside are dropped.
    FourierTaylorSeries with_cutoffs(int taylor_cutoff, int fourier_cutoff) const
    {
        FourierTaylorSeries out(dim_, taylor_cutoff, fourier_cutoff);
        for (const auto &[m, c] : terms_) {
            if (out.admits(m)) {
                out.terms_.emplace(m, c);
            }
        }
        return out;
    }

    bool operator==(const FourierTaylorSeries &) const = default;

private:
    int dim_ = 1;
    int taylor_cutoff_ = 0;
    int fourier_cutoff_ = 0;
    Terms terms_;
};

using Series = FourierTaylorSeries;

namespace detail
{

inline void require_same_dim(const Series &a, const Series &b)
{
    if (a.dim() != b.dim()) {
        throw DimensionMismatch("series dimensions differ: " + num(a.dim()) + " vs "
                                + num(b.dim()));
    }
}

inline Monomial add_keys(const Monomial &a, const Monomial &b)
{
    Monomial m;
    for (int i = 0; i < kMaxDim; ++i) {
        m.k[i] = a.k[i] + b.k[i];
        m.iota[i] = a.iota[i] + b.iota[i];
    }
    return m;
}

} // namespace detail

struct Cutoffs {
    int taylor;
    int fourier;
};

inline Series add(const Series &a, const Series &b)
{
    detail::require_same_dim(a, b);
    Series out(a.dim(), std::max(a.taylor_cutoff(), b.taylor_cutoff()),
               std::max(a.fourier_cutoff(), b.fourier_cutoff()));
    for (const auto &[m, c] : a.terms()) {
        out.raw(m) += c;
    }
    for (const auto &[m, c] : b.terms()) {
        out.raw(m) += c;
    }
    out.prune();
    return out;
}

inline Series scale(const Series &a, Complex factor)
{
    Series out(a.dim(), a.taylor_cutoff(), a.fourier_cutoff());
    for (const auto &[m, c] : a.terms()) {
        out.raw(m) = c * factor;
    }
    out.prune();
    return out;
}

inline Series subtract(const Series &a, const Series &b)
{
    detail::require_same_dim(a, b);
    Series out(a.dim(), std::max(a.taylor_cutoff(), b.taylor_cutoff()),
               std::max(a.fourier_cutoff(), b.fourier_cutoff()));
    for (const auto &[m, c] : a.terms()) {
        out.raw(m) += c;
    }
    for (const auto &[m, c] : b.terms()) {
        out.raw(m) -= c;
    }
    out.prune();
    return out;
}

inline Series operator+(const Series &a, const Series &b)
{
    return add(a, b);
}
inline Series operator-(const Series &a, const Series &b)
{
    return subtract(a, b);
}
inline Series operator*(Complex f, const Series &a)
{
    return scale(a, f);
}

// Cauchy product truncated to `cut` (default: the larger input cutoffs).
inline Series mul(const Series &a, const Series &b, std::optional<Cutoffs> cut = std::nullopt)
{
    detail::require_same_dim(a, b);
    const Cutoffs c = cut.value_or(
        Cutoffs{std::max(a.taylor_cutoff(), b.taylor_cutoff()), std::max(a.fourier_cutoff(), b.fourier_cutoff())});
    Series out(a.dim(), c.taylor, c.fourier);
    for (const auto &[ma, ca] : a.terms()) {
        const int da = ma.taylor_degree();
        for (const auto &[mb, cb] : b.terms()) {
            if (da + mb.taylor_degree() > c.taylor) {
                continue;
            }
            const Monomial m = detail::add_keys(ma, mb);
            if (m.fourier_order() > c.fourier) {
                continue;
            }
            out.raw(m) += ca * cb;
        }
    }
    out.prune();
    return out;
}

struct Variable {
    enum class Kind { action, angle };
    Kind kind;
    int index;

    static Variable y(int i)
    {
        return {Kind::action, i};
    }
    static Variable x(int i)
    {
        return {Kind::angle, i};
    }
};

inline Series partial_derivative(const Series &a, Variable v)
{
    if (v.index < 0 || v.index >= a.dim()) {
        throw DimensionMismatch("derivative variable index out of range");
    }
    Series out(a.dim(), a.taylor_cutoff(), a.fourier_cutoff());
    const int i = v.index;
    for (const auto &[m, c] : a.terms()) {
        if (v.kind == Variable::Kind::action) {
            if (m.iota[i] == 0) {
                continue;
            }
            Monomial d = m;
            d.iota[i] -= 1;
            out.raw(d) += c * static_cast<double>(m.iota[i]);
        } else {
            if (m.k[i] == 0) {
                continue;
            }
            out.raw(m) += c * Complex(0.0, static_cast<double>(m.k[i]));
        }
    }
    out.prune();
    return out;
}

// {f, g} = <d_x f, d_y g> - <d_y f, d_x g>. Under this convention
// {<w, y>, exp(i<k,x>)} = -i <k, w> exp(i<k,x>) and d/dt G(phi_F^t) = {G, F}.
inline Series poisson_bracket(const Series &f, const Series &g, std::optional<Cutoffs> cut = std::nullopt)
{
    detail::require_same_dim(f, g);
    const Cutoffs c = cut.value_or(
        Cutoffs{std::max(f.taylor_cutoff(), g.taylor_cutoff()), std::max(f.fourier_cutoff(), g.fourier_cutoff())});
    const int n = f.dim();
    Series out(n, c.taylor, c.fourier);
    for (const auto &[mf, cf] : f.terms()) {
        const int df = mf.taylor_degree();
        for (const auto &[mg, cg] : g.terms()) {
            const int deg = df + mg.taylor_degree() - 1;
            if (deg < 0 || deg > c.taylor) {
                continue;
            }
            Monomial base = detail::add_keys(mf, mg);
            if (base.fourier_order() > c.fourier) {
                continue;
            }
            const Complex prod = cf * cg;
            for (int i = 0; i < n; ++i) {
                // i k_f,i * iota_g,i  -  iota_f,i * i k_g,i
                const double w = static_cast<double>(mf.k[i]) * mg.iota[i] - static_cast<double>(mf.iota[i]) * mg.k[i];
                if (w == 0.0) {
                    continue;
                }
                Monomial m = base;
                m.iota[i] -= 1;
                out.raw(m) += prod * Complex(0.0, w);
            }
        }
    }
    out.prune();
    return out;
}

inline Series angle_average(const Series &a)
{
    Series out(a.dim(), a.taylor_cutoff(), a.fourier_cutoff());
    for (const auto &[m, c] : a.terms()) {
        if (m.is_average()) {
            out.raw(m) = c;
        }
    }
    return out;
}

// Weighted l1 majorant sum |c| s^|iota| e^{|k| r}; an upper bound for the
// supremum on D(s, r).
inline double weighted_norm(const Series &a, const Domain &d)
{
    double total = 0.0;
    for (const auto &[m, c] : a.terms()) {
        total += std::abs(c) * std::pow(d.s, m.taylor_degree()) * std::exp(m.fourier_order() * d.r);
    }
    return total;
}

// Direct summation. Points are expected to lie in the intended domain; this
// is not checked.
inline Complex evaluate(const Series &a, std::span<const Complex> y, std::span<const Complex> x)
{
    if (static_cast<int>(y.size()) != a.dim() || static_cast<int>(x.size()) != a.dim()) {
        throw DimensionMismatch("evaluation point has wrong dimension");
    }
    Complex total{};
    for (const auto &[m, c] : a.terms()) {
        Complex term = c;
        Complex phase{};
        for (int i = 0; i < a.dim(); ++i) {
            for (int p = 0; p < m.iota[i]; ++p) {
                term *= y[i];
            }
            phase += static_cast<double>(m.k[i]) * x[i];
        }
        total += term * std::exp(Complex(0.0, 1.0) * phase);
    }
    return total;
}

inline Complex evaluate(const Series &a, std::span<const double> y, std::span<const double> x)
{
    std::vector<Complex> yc(y.begin(), y.end());
    std::vector<Complex> xc(x.begin(), x.end());
    return evaluate(a, std::span<const Complex>(yc), std::span<const Complex>(xc));
}

struct FamilySample {
    std::vector<double> xi;
    Series series;
};

// Sampled C^beta seminorm: max over sample pairs of
// |P(xi) - P(zeta)|_D / |xi - zeta|^beta. A lower bound of the true sup.
inline double holder_seminorm(std::span<const FamilySample> family, double beta, const Domain &d)
{
    if (family.size() < 2) {
        throw InvalidArgument("holder_seminorm needs at least two samples");
    }
    double best = 0.0;
    for (std::size_t a = 0; a < family.size(); ++a) {
        for (std::size_t b = a + 1; b < family.size(); ++b) {
            double dist2 = 0.0;
            if (family[a].xi.size() != family[b].xi.size()) {
                throw DimensionMismatch("parameter samples differ in length");
            }
            for (std::size_t i = 0; i < family[a].xi.size(); ++i) {
                dist2 += (family[a].xi[i] - family[b].xi[i]) * (family[a].xi[i] - family[b].xi[i]);
            }
            if (dist2 == 0.0) {
                throw InvalidArgument("holder_seminorm samples must be distinct");
            }
            const double num = weighted_norm(subtract(family[a].series, family[b].series), d);
            best = std::max(best, num / std::pow(std::sqrt(dist2), beta));
        }
    }
    return best;
}

// Largest |c(k, iota) - conj(c(-k, iota))| over stored terms; zero for a
// series representing a real function.
inline double reality_defect(const Series &a)
{
    double worst = 0.0;
    for (const auto &[m, c] : a.terms()) {
        Monomial mirror = m;
        for (int i = 0; i < kMaxDim; ++i) {
            mirror.k[i] = -m.k[i];
        }
        worst = std::max(worst, std::abs(c - std::conj(a.coeff(mirror))));
    }
    return worst;
}

// Keeps only terms satisfying the predicate.
template <typename Pred>
Series filter_terms(const Series &a, Pred &&keep)
{
    Series out(a.dim(), a.taylor_cutoff(), a.fourier_cutoff());
    for (const auto &[m, c] : a.terms()) {
        if (keep(m)) {
            out.raw(m) = c;
        }
    }
    return out;
}

// Exact recentring y -> y + shift by binomial expansion.
inline Series translate_series(const Series &a, std::span<const double> shift)
{
    if (static_cast<int>(shift.size()) != a.dim()) {
        throw DimensionMismatch("shift has wrong dimension");
    }
    const int n = a.dim();
    Series out(n, a.taylor_cutoff(), a.fourier_cutoff());
    auto binom = [](int top, int bottom) {
        double r = 1.0;
        for (int j = 1; j <= bottom; ++j) {
            r = r * (top - bottom + j) / j;
        }
        return r;
    };
    for (const auto &[m, c] : a.terms()) {
        // Enumerate all j <= iota componentwise.
        std::array<int, kMaxDim> j{};
        while (true) {
            double w = 1.0;
            for (int i = 0; i < n; ++i) {
                w *= binom(m.iota[i], j[i]) * std::pow(shift[i], m.iota[i] - j[i]);
            }
            if (w != 0.0) {
                Monomial t = m;
                t.iota = j;
                out.raw(t) += c * w;
            }
            int i = 0;
            while (i < n && j[i] == m.iota[i]) {
                j[i] = 0;
                ++i;
            }
            if (i == n) {
                break;
            }
            ++j[i];
        }
    }
    out.prune();
    return out;
}

// ---- serialization --------------------------------------------------------

inline nlohmann::json to_json(const Series &a)
{
    nlohmann::json terms = nlohmann::json::array();
    for (const auto &[m, c] : a.terms()) {
        std::vector<int> k(m.k.begin(), m.k.begin() + a.dim());
        std::vector<int> iota(m.iota.begin(), m.iota.begin() + a.dim());
        terms.push_back({{"k", k}, {"iota", iota}, {"re", c.real()}, {"im", c.imag()}});
    }
    return {{"dim", a.dim()},
            {"taylor_cutoff", a.taylor_cutoff()},
            {"fourier_cutoff", a.fourier_cutoff()},
            {"terms", terms}};
}

inline Series series_from_json(const nlohmann::json &j)
{
    try {
        Series out(j.at("dim").get<int>(), j.at("taylor_cutoff").get<int>(), j.at("fourier_cutoff").get<int>());
        for (const auto &t : j.at("terms")) {
            const auto k = t.at("k").get<std::vector<int>>();
            const auto iota = t.at("iota").get<std::vector<int>>();
            if (static_cast<int>(k.size()) != out.dim()) {
                throw DimensionMismatch("term index length differs from series dimension");
            }
            out.add_term(make_monomial(k, iota), Complex(t.at("re").get<double>(), t.value("im", 0.0)));
        }
        return out;
    } catch (const nlohmann::json::exception &e) {
        throw InvalidArgument(std::string("malformed series JSON: ") + e.what());
    }
}

} // namespace kamiter

#endif // KAMITER_SERIES_HPP
