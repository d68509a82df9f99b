#ifndef KAMITER_KAM_CORE_HPP
#define KAMITER_KAM_CORE_HPP

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <kamiter/assumptions.hpp>
#include <kamiter/errors.hpp>
#include <kamiter/series.hpp>

namespace kamiter
{

// N = e + <frequency, y> + hbar(y). `omega0` is the fixed target frequency;
// the accumulated linear drift sum_j p01^j is frequency - omega0.
struct NormalForm {
    double e = 0.0;
    Vector omega0;
    Vector frequency;
    Series hbar;

    int dim() const noexcept
    {
        return static_cast<int>(omega0.size());
    }

    Vector drift() const
    {
        Vector d(frequency.size());
        for (std::size_t i = 0; i < d.size(); ++i) {
            d[i] = frequency[i] - omega0[i];
        }
        return d;
    }

    static NormalForm unperturbed(Vector omega, Series hbar)
    {
        NormalForm nf;
        nf.omega0 = omega;
        nf.frequency = std::move(omega);
        nf.hbar = std::move(hbar);
        nf.validate();
        return nf;
    }

    void validate() const
    {
        if (hbar.dim() != dim() || static_cast<int>(frequency.size()) != dim()) {
            throw DimensionMismatch("normal form components disagree in dimension");
        }
        for (const auto &[m, c] : hbar.terms()) {
            if (!m.is_average() || m.taylor_degree() < 2) {
                throw InvalidArgument("hbar must be angle independent and start at degree 2");
            }
        }
    }
};

// The normal form as a series with the given cutoffs.
inline Series as_series(const NormalForm &nf, Cutoffs cut)
{
    Series out(nf.dim(), cut.taylor, cut.fourier);
    Monomial zero;
    out.add_term(zero, nf.e);
    for (int i = 0; i < nf.dim(); ++i) {
        Monomial m;
        m.iota[i] = 1;
        out.add_term(m, nf.frequency[i]);
    }
    for (const auto &[m, c] : nf.hbar.terms()) {
        out.add_term(m, c);
    }
    return out;
}

// Generating Hamiltonian of one Lie transform; carries no k = 0 terms.
struct Generator {
    Series F;

    void validate(int K_plus, int m) const
    {
        for (const auto &[key, c] : F.terms()) {
            if (key.is_average() || key.fourier_order() > K_plus || key.taylor_degree() > m) {
                throw InvalidArgument("generator term outside 0 < |k| <= K+, |iota| <= m");
            }
        }
    }
};

struct Truncation {
    Series R;
    Series tail;
};

// Splits P into R (|k|_1 <= K_plus and |iota|_1 <= m) and the remaining
// tail. R + tail = P exactly.
inline Truncation truncate(const Series &P, int K_plus, int m)
{
    if (K_plus < 1 || m < 1) {
        throw InvalidArgument("truncation needs K+ >= 1 and m >= 1");
    }
    Truncation out{Series(P.dim(), m, K_plus), Series(P.dim(), P.taylor_cutoff(), P.fourier_cutoff())};
    for (const auto &[key, c] : P.terms()) {
        if (key.fourier_order() <= K_plus && key.taylor_degree() <= m) {
            out.R.raw(key) = c;
        } else {
            out.tail.raw(key) = c;
        }
    }
    return out;
}

namespace detail
{

using FourierIndex = std::array<int, kMaxDim>;

// Groups the terms of a series by Fourier index; each group is returned as
// an angle-independent polynomial.
inline std::map<FourierIndex, Series> split_modes(const Series &a, int taylor_cutoff)
{
    std::map<FourierIndex, Series> modes;
    for (const auto &[key, c] : a.terms()) {
        auto [it, inserted] = modes.try_emplace(key.k, a.dim(), taylor_cutoff, 0);
        Monomial poly = key;
        poly.k = {};
        it->second.raw(poly) = c;
    }
    return modes;
}

inline int l1(const FourierIndex &k)
{
    int s = 0;
    for (int v : k) {
        s += std::abs(v);
    }
    return s;
}

} // namespace detail

struct HomologicalOptions {
    int m;        // Taylor order of the generator
    Domain domain; // D(s) on which the divisor correction is bounded
};

// Solves {N, F} + R - [R] = 0 mode by mode:
//   i <k, omega0 + drift + d_y hbar(y)> f_k(y) = p_k(y).
// The y-dependent divisor is inverted by its Neumann series about y = 0,
// truncated at Taylor degree m.
inline Generator solve_homological(const NormalForm &nf, const Series &R, const DiophantineParams &dp,
                                   const HomologicalOptions &opt)
{
    detail::require_same_dim(R, nf.hbar);
    const int n = nf.dim();
    const int m = opt.m;
    std::vector<Series> grad;
    for (int i = 0; i < n; ++i) {
        grad.push_back(partial_derivative(nf.hbar, Variable::y(i)).with_cutoffs(m, 0));
    }
    const Vector drift = nf.drift();
    Generator gen{Series(n, m, R.fourier_cutoff())};
    for (const auto &[k, poly] : detail::split_modes(R, m)) {
        const int kk = detail::l1(k);
        if (kk == 0) {
            continue;
        }
        double base = 0.0;
        double shift = 0.0;
        for (int i = 0; i < n; ++i) {
            base += k[i] * nf.omega0[i];
            shift += k[i] * drift[i];
        }
        const double dio_floor = dp.gamma / std::pow(static_cast<double>(kk), dp.tau);
        if (std::abs(base) <= dio_floor) {
            throw SmallDivisorBreach("|<k, omega0>| = " + num(std::abs(base)) + " <= gamma/|k|^tau at |k| = "
                                     + num(kk));
        }
        Series corr(n, m, 0);
        for (int i = 0; i < n; ++i) {
            if (k[i] != 0) {
                corr = add(corr, scale(grad[i], static_cast<double>(k[i])));
            }
        }
        const double corr_size = std::abs(shift) + weighted_norm(corr, opt.domain);
        if (corr_size * std::pow(static_cast<double>(kk), dp.tau) >= 0.5 * dp.gamma) {
            throw SafetyMarginBreach("divisor correction " + num(corr_size) + " too large at |k| = "
                                     + num(kk) + "; shrink s");
        }
        const double divisor = base + shift;
        // 1/(i (d + c)) = (1/(i d)) sum_j (-c/d)^j
        const Series ratio = scale(corr, -1.0 / divisor);
        Series term(n, m, 0);
        term.add_term(Monomial{}, 1.0);
        Series inverse = term;
        for (int j = 1; j <= m && !term.empty(); ++j) {
            term = mul(term, ratio, Cutoffs{m, 0});
            inverse = add(inverse, term);
        }
        inverse = scale(inverse, 1.0 / Complex(0.0, divisor));
        const Series fk = mul(inverse, poly, Cutoffs{m, 0});
        for (const auto &[key, c] : fk.terms()) {
            Monomial full = key;
            full.k = k;
            gen.F.raw(full) = c;
        }
    }
    gen.F.prune();
    return gen;
}

struct LieOptions {
    int order = 8;            // J
    Cutoffs cutoffs{10, 16};  // working cutoffs (m_work, K_work)
    Domain domain;            // norms for the contraction test
    double relative_stop = 1e-16;
};

struct LieResult {
    Series composed;
    double remainder_estimate = 0.0;
    int terms_used = 0;
    std::vector<double> term_norms;
};

// H o phi_F^1 = sum_j L_F^j H / j!, L_F G = {G, F}.
inline LieResult lie_compose(const Series &H, const Generator &gen, const LieOptions &opt)
{
    detail::require_same_dim(H, gen.F);
    LieResult out;
    Series term = H.with_cutoffs(opt.cutoffs.taylor, opt.cutoffs.fourier);
    out.composed = term;
    const double h_norm = weighted_norm(term, opt.domain);
    out.term_norms.push_back(h_norm);
    if (gen.F.empty()) {
        return out;
    }
    for (int j = 1; j <= opt.order; ++j) {
        term = scale(poisson_bracket(term, gen.F, opt.cutoffs), 1.0 / j);
        const double tn = weighted_norm(term, opt.domain);
        const double prev = out.term_norms.back();
        out.term_norms.push_back(tn);
        out.composed = add(out.composed, term);
        out.terms_used = j;
        out.remainder_estimate = 2.0 * tn;
        if (j == std::max(1, opt.order / 2) && prev > 0.0 && tn / prev >= 0.5) {
            throw LieSeriesStalled("Lie term ratio " + num(tn / prev) + " at order " + num(j));
        }
        if (tn <= opt.relative_stop * h_norm) {
            break;
        }
    }
    return out;
}

inline LieResult lie_compose(const NormalForm &nf, const Series &P, const Generator &gen, const LieOptions &opt)
{
    return lie_compose(add(as_series(nf, opt.cutoffs), P), gen, opt);
}

struct Extraction {
    NormalForm nf;
    Series P_plus;
    double p00 = 0.0;
    Vector p01;
};

// Splits a composed Hamiltonian into the next normal form (all angle
// averaged terms) and the next perturbation (all k != 0 terms).
inline Extraction extract_normal_form(const Series &composed, const NormalForm &old)
{
    const int n = old.dim();
    Extraction out;
    out.nf.omega0 = old.omega0;
    out.nf.frequency.assign(n, 0.0);
    out.nf.hbar = Series(n, composed.taylor_cutoff(), 0);
    out.P_plus = Series(n, composed.taylor_cutoff(), composed.fourier_cutoff());
    for (const auto &[key, c] : composed.terms()) {
        if (!key.is_average()) {
            out.P_plus.raw(key) = c;
            continue;
        }
        const int deg = key.taylor_degree();
        if (deg == 0) {
            out.nf.e = c.real();
        } else if (deg == 1) {
            for (int i = 0; i < n; ++i) {
                if (key.iota[i] == 1) {
                    out.nf.frequency[i] = c.real();
                }
            }
        } else {
            out.nf.hbar.raw(key) = c;
        }
    }
    out.p00 = out.nf.e - old.e;
    out.p01.resize(n);
    for (int i = 0; i < n; ++i) {
        out.p01[i] = out.nf.frequency[i] - old.frequency[i];
    }
    return out;
}

struct Translation {
    NormalForm nf;
    Series P;
};

// Recentres N + P about y + shift. The constant goes to e, the linear part
// to the frequency, degree >= 2 stays in hbar.
inline Translation translate_action(const NormalForm &nf, const Series &P, std::span<const double> shift, double s)
{
    if (static_cast<int>(shift.size()) != nf.dim()) {
        throw DimensionMismatch("shift has wrong dimension");
    }
    if (!(norm2(shift) < 0.25 * s)) {
        throw ShiftTooLarge("|shift| = " + num(norm2(shift)) + " is not below s/4 = " + num(0.25 * s));
    }
    Translation out;
    out.nf.omega0 = nf.omega0;
    out.nf.frequency = nf.frequency;
    out.nf.e = nf.e;
    for (int i = 0; i < nf.dim(); ++i) {
        out.nf.e += nf.frequency[i] * shift[i];
    }
    out.nf.hbar = Series(nf.dim(), nf.hbar.taylor_cutoff(), 0);
    const Series moved = translate_series(nf.hbar, shift);
    for (const auto &[key, c] : moved.terms()) {
        const int deg = key.taylor_degree();
        if (deg == 0) {
            out.nf.e += c.real();
        } else if (deg == 1) {
            for (int i = 0; i < nf.dim(); ++i) {
                if (key.iota[i] == 1) {
                    out.nf.frequency[i] += c.real();
                }
            }
        } else {
            out.nf.hbar.raw(key) = c;
        }
    }
    out.P = translate_series(P, shift);
    return out;
}

// Gradient of hbar at a real point.
inline Vector gradient_at(const Series &hbar, std::span<const double> y)
{
    const int n = hbar.dim();
    Vector g(n, 0.0);
    const Vector zero(n, 0.0);
    for (int i = 0; i < n; ++i) {
        g[i] = evaluate(partial_derivative(hbar, Variable::y(i)), y, zero).real();
    }
    return g;
}

} // namespace kamiter

#endif // KAMITER_KAM_CORE_HPP
