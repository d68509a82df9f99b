#ifndef KAMITER_SCHEDULE_HPP
#define KAMITER_SCHEDULE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include <kamiter/errors.hpp>
#include <kamiter/series.hpp>

namespace kamiter
{

enum class Mode { paper, practical };

inline const char *to_string(Mode m)
{
    return m == Mode::paper ? "paper" : "practical";
}

// Constants of the 0-th step that depend only on (eps, n, m, tau).
struct PaperConstants {
    double rho;
    int eta;
    double gamma0;
    double mu0;
    double K1;
};

// rho = 1/(2(m+1)); eta = smallest integer with (1+rho)^eta > 2;
// gamma0 = eps^{1/(4(n+m+2))}; mu0 = eps^{1/(8 eta (tau+1)(m+1))};
// K1 = ([log 1/mu0] + 1)^{3 eta}.
inline PaperConstants paper_constants(double eps, int n, int m, double tau)
{
    if (!(eps > 0.0)) {
        throw InvalidArgument("eps must be positive");
    }
    PaperConstants c{};
    c.rho = 1.0 / (2.0 * (m + 1));
    c.eta = 1;
    while (!(std::pow(1.0 + c.rho, c.eta) > 2.0)) {
        ++c.eta;
    }
    c.gamma0 = std::pow(eps, 1.0 / (4.0 * (n + m + 2)));
    c.mu0 = std::pow(eps, 1.0 / (8.0 * c.eta * (tau + 1.0) * (m + 1)));
    c.K1 = std::pow(std::floor(std::log(1.0 / c.mu0)) + 1.0, 3.0 * c.eta);
    return c;
}

// Number of k in Z^n with |k|_1 = kappa.
inline double lattice_shell(int n, int kappa)
{
    if (kappa == 0) {
        return 1.0;
    }
    auto binom = [](int top, int bottom) {
        double r = 1.0;
        for (int j = 1; j <= bottom; ++j) {
            r = r * (top - bottom + j) / j;
        }
        return r;
    };
    double total = 0.0;
    for (int j = 1; j <= std::min(n, kappa); ++j) {
        total += std::pow(2.0, j) * binom(n, j) * binom(kappa - 1, j - 1);
    }
    return total;
}

// Gamma(r - r+) = sum_{0<|k|<=K} |k|^{3 tau + 5} e^{-|k| (r - r+)/8}.
inline double gamma_factor(int n, double r, double r_plus, int K_plus, double tau)
{
    if (!(r > r_plus && r_plus > 0.0)) {
        throw InvalidArgument("gamma_factor needs r > r+ > 0");
    }
    double total = 0.0;
    for (int kappa = 1; kappa <= K_plus; ++kappa) {
        total += lattice_shell(n, kappa) * std::pow(kappa, 3.0 * tau + 5.0) * std::exp(-kappa * (r - r_plus) / 8.0);
    }
    return total;
}

// int_K^inf t^n e^{-a t} dt = e^{-aK} sum_{j=0}^n n!/j! K^j / a^{n-j+1}.
inline double tail_integral(int n, double K, double a)
{
    if (!(a > 0.0)) {
        throw InvalidArgument("tail_integral needs a > 0");
    }
    double total = 0.0;
    double factor = 1.0; // n!/j!
    for (int j = n; j >= 0; --j) {
        total += factor * std::pow(K, j) / std::pow(a, n - j + 1);
        factor *= j;
    }
    return std::exp(-a * K) * total;
}

struct Schedule {
    Mode mode = Mode::practical;
    int n = 2;
    int m = 5;
    double tau = 2.0;
    double rho = 1.0 / 12.0;
    int eta = 9;
    double gamma0 = 1.0;
    double r0 = 0.5;
    double s0 = 0.25;
    double mu0 = 1.0;
    double r = 0.5;
    double s = 0.25;
    double mu = 1.0;
    int K = 1;   // cutoff used by the next step
    int nu = 0;  // completed steps
    double Mstar = 0.0;
    double c0 = 1.0;
    double alpha = 1.0;

    // Scale of the norm bound |P| <= gamma0^{n+m+2} s^m mu.
    double norm_scale(double s_value) const
    {
        return std::pow(gamma0, n + m + 2) * std::pow(s_value, m);
    }
};

// Largest cutoff ever produced; the paper-mode formula grows without bound.
inline constexpr int kCutoffCeiling = 1 << 20;

inline int clamp_cutoff(double K)
{
    if (!(K < kCutoffCeiling)) {
        return kCutoffCeiling;
    }
    return std::max(1, static_cast<int>(std::ceil(K)));
}

struct StepPlan {
    double r_plus;
    int K_plus;
};

// r+ and K+ for the step leaving `sch`.
inline StepPlan plan_step(const Schedule &sch)
{
    if (sch.mode == Mode::paper) {
        const double K = std::pow(std::floor(std::log(1.0 / sch.mu)) + 1.0, 3.0 * sch.eta);
        return {sch.r / 2.0 + sch.r0 / 4.0, clamp_cutoff(K)};
    }
    const double r_plus = sch.r - sch.r0 / std::pow(2.0, sch.nu + 3);
    const double lm = sch.mu > 0.0 ? std::abs(std::log(sch.mu)) : 0.0;
    return {r_plus, clamp_cutoff(lm * (sch.tau + 2.0) / (sch.r - r_plus))};
}

// Schedule after a step that produced a perturbation of majorant norm
// `norm_P_plus` (measured on the returned domain).
inline Schedule advance_schedule(const Schedule &sch, const StepPlan &plan)
{
    Schedule out = sch;
    out.nu = sch.nu + 1;
    out.r = plan.r_plus;
    out.K = plan.K_plus;
    if (sch.mode == Mode::paper) {
        out.alpha = std::pow(sch.mu, 2.0 * sch.rho);
        out.s = out.alpha * sch.s / 8.0;
        out.mu = std::pow(8.0, sch.m) * sch.c0 * std::pow(sch.mu, 1.0 + sch.rho);
    } else {
        out.alpha = std::min(1.0, std::pow(sch.mu, 2.0 * sch.rho));
        out.s = out.alpha * sch.s / 8.0;
    }
    return out;
}

struct HypothesisInputs {
    int n = 2;
    int m = 5;
    double tau = 2.0;
    double rho = 1.0 / 12.0;
    double gamma0 = 1.0;
    double mu0 = 1.0;
    double mu = 1.0;
    double s = 0.25;
    double r = 0.5;
    double r_plus = 0.25;
    int K_plus = 1;
    double alpha = 1.0;
    double Mstar = 0.0;
    double Gamma = 0.0;
    double norm_P = 0.0;
    double hbar_deviation = 0.0; // max_{|i|<=2} |d^i hbar - d^i hbar0|
    double drift_norm = 0.0;     // |sum p01|
    double dF_y = 0.0;           // max_i |d_{y_i} F|
    double dF_x = 0.0;           // max_i |d_{x_i} F|
};

struct HypothesisRecord {
    std::string name;
    bool satisfied;
    double value;
    double bound;
    double margin;
};

// The seven step hypotheses with measured norms in place of the abstract
// constants. H5 and H6 use the measured generator derivatives, which are the
// quantities c4 s^{m-1} mu Gamma and c4 s^m mu Gamma bound. With P = 0 the
// left sides of H1, H2, H4, H5, H6 vanish.
inline std::array<HypothesisRecord, 7> check_hypotheses(const HypothesisInputs &in)
{
    auto rec = [](const char *name, double value, double bound, bool strict) {
        const double margin = (bound - value) / bound;
        const bool ok = strict ? value < bound : value <= bound;
        return HypothesisRecord{name, ok, value, bound, margin};
    };
    const double dr = in.r - in.r_plus;
    const double h1 = in.norm_P > 0.0 ? tail_integral(in.n, in.K_plus, dr / 16.0) : 0.0;
    std::array<HypothesisRecord, 7> out{
        rec("H1", h1, in.mu, false),
        rec("H2", in.hbar_deviation, std::sqrt(in.mu0), false),
        rec("H3", 2.0 * in.s, in.gamma0 / ((in.Mstar + 2.0) * std::pow(in.K_plus, in.tau + 1.0)), true),
        rec("H4", in.drift_norm, std::sqrt(in.mu0), true),
        rec("H5", in.dF_y, dr / 8.0, true),
        rec("H6", in.dF_x, in.alpha * in.s / 8.0, true),
        rec("H7", std::pow(in.mu, in.rho) * (in.Gamma * in.Gamma + in.Gamma), 1.0, false),
    };
    return out;
}

} // namespace kamiter

#endif // KAMITER_SCHEDULE_HPP
