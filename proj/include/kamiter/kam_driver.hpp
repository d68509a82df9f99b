#ifndef KAMITER_KAM_DRIVER_HPP
#define KAMITER_KAM_DRIVER_HPP

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <kamiter/assumptions.hpp>
#include <kamiter/errors.hpp>
#include <kamiter/frequency_matching.hpp>
#include <kamiter/kam_core.hpp>
#include <kamiter/model_zoo.hpp>
#include <kamiter/schedule.hpp>
#include <kamiter/series.hpp>

namespace kamiter
{

struct RunOptions {
    Mode mode = Mode::practical;
    int m = 5;
    double tau = 2.0;
    int grid = 9;
    double stop_tol = 1e-12;
    double freq_tol = 1e-9;
    double homological_tol = 1e-10;
    int max_steps = 12;
    int min_steps = 0;
    int lie_order = 8;
    int m_work = 0; // 0 selects 2m
    double s = 0.25;
    double r = 0.5;
    int diverge_after = 3;

    int work_order() const noexcept
    {
        return m_work > 0 ? m_work : 2 * m;
    }
};

// Everything needed to redo one step's transformation on a full Hamiltonian:
// Lie transform with F at the recorded cutoffs, then y -> y + shift.
struct TransformationStep {
    int K = 1;
    Cutoffs work{10, 2};
    int lie_order = 8;
    Domain domain;
    double relative_stop = 1e-16;
    Series F;
    Vector shift;
};

struct KamState {
    NormalForm nf;
    Series P;
    Vector xi;
    int step = 0;
    ParameterGrid grid;
    // parameter route only: one normal form and perturbation per grid node
    std::vector<NormalForm> node_nf;
    std::vector<Series> node_P;
};

struct StepReport {
    int step = 0;
    double r = 0.0;
    double s = 0.0;
    double mu = 0.0;
    int K = 0;
    double norm_P = 0.0;
    double holder_P = 0.0;
    Vector xi;
    double xi_disp = 0.0;
    double freq_residual = 0.0;
    std::array<HypothesisRecord, 7> H{};
    double gamma_factor = 0.0;
    double lie_remainder = 0.0;
    double homological_residual = 0.0;
    int degree = 0;
    double snap = 0.0;
    double wall_time = 0.0;
};

struct RunContext {
    HamiltonianFamily fam;
    RunOptions opt;
    double eps = 0.0;
    DiophantineParams dp{1.0, 2.0};
    Vector target;
    Series hbar0;
};

struct Setup {
    RunContext ctx;
    KamState state;
    Schedule schedule;
    Series H0;
    StepReport initial;
};

namespace detail
{

// max over |i| <= 2 of the majorant norm of d_y^i h on D(s).
inline double derivative_norm_max(const Series &h, double s)
{
    const Domain d{s, 1.0};
    double best = weighted_norm(h, d);
    for (int i = 0; i < h.dim(); ++i) {
        const Series di = partial_derivative(h, Variable::y(i));
        best = std::max(best, weighted_norm(di, d));
        for (int j = 0; j < h.dim(); ++j) {
            best = std::max(best, weighted_norm(partial_derivative(di, Variable::y(j)), d));
        }
    }
    return best;
}

inline double generator_gradient(const Series &F, const Domain &d, Variable::Kind kind)
{
    double best = 0.0;
    for (int i = 0; i < F.dim(); ++i) {
        best = std::max(best, weighted_norm(partial_derivative(F, Variable{kind, i}), d));
    }
    return best;
}

inline double holder_over_cross(const ParameterGrid &grid, const std::vector<Series> &family, double beta,
                                const Domain &d)
{
    std::vector<FamilySample> samples;
    for (int idx : grid.cross_nodes()) {
        samples.push_back({grid.nodes[idx], family[idx]});
    }
    return holder_seminorm(samples, beta, d);
}

inline double holder_of_translates(const ParameterGrid &grid, const Series &P, double beta, const Domain &d)
{
    std::vector<FamilySample> samples;
    for (int idx : grid.cross_nodes()) {
        samples.push_back({grid.nodes[idx], translate_series(P, grid.nodes[idx])});
    }
    return holder_seminorm(samples, beta, d);
}

} // namespace detail

// weighted_norm({N, F} + R - [R]) over Taylor degrees <= m - 1.
inline double homological_residual(const NormalForm &nf, const Generator &gen, const Series &R, int m,
                                   const Domain &d)
{
    int deg_h = 1;
    for (const auto &[key, c] : nf.hbar.terms()) {
        deg_h = std::max(deg_h, key.taylor_degree());
    }
    const Cutoffs cut{m + deg_h, std::max(R.fourier_cutoff(), gen.F.fourier_cutoff())};
    Series res = poisson_bracket(as_series(nf, cut), gen.F, cut);
    res = add(res, subtract(R, angle_average(R)));
    res = filter_terms(res, [m](const Monomial &key) { return key.taylor_degree() <= m - 1; });
    return weighted_norm(res, d);
}

// Torus residual: largest majorant of d_y P and d_x P restricted to y = 0.
inline double torus_residual(const Series &P, double r)
{
    const Domain d{1.0, r};
    double best = 0.0;
    for (int i = 0; i < P.dim(); ++i) {
        for (auto kind : {Variable::Kind::action, Variable::Kind::angle}) {
            const Series g = partial_derivative(P, Variable{kind, i});
            best = std::max(best, weighted_norm(filter_terms(g, [](const Monomial &k) { return k.taylor_degree() == 0; }), d));
        }
    }
    return best;
}

namespace detail
{

inline StepReport base_report(const RunContext &ctx, const Schedule &sch, const Series &P, double holder,
                              const Vector &xi, double drift_norm, const Series &hbar, const Series *F,
                              const StepPlan &plan, double alpha)
{
    StepReport rep;
    rep.step = sch.nu;
    rep.r = sch.r;
    rep.s = sch.s;
    rep.mu = sch.mu;
    rep.K = plan.K_plus;
    rep.norm_P = weighted_norm(P, Domain{sch.s, sch.r});
    rep.holder_P = holder;
    rep.xi = xi;
    HypothesisInputs in;
    in.n = ctx.fam.n;
    in.m = sch.m;
    in.tau = sch.tau;
    in.rho = sch.rho;
    in.gamma0 = sch.gamma0;
    in.mu0 = sch.mu0;
    in.mu = sch.mu;
    in.s = sch.s;
    in.r = sch.r;
    in.r_plus = plan.r_plus;
    in.K_plus = plan.K_plus;
    in.alpha = alpha;
    in.Mstar = sch.Mstar;
    in.Gamma = gamma_factor(ctx.fam.n, sch.r, plan.r_plus, plan.K_plus, sch.tau);
    in.norm_P = rep.norm_P;
    in.hbar_deviation = derivative_norm_max(subtract(hbar, ctx.hbar0), sch.s);
    in.drift_norm = drift_norm;
    if (F != nullptr) {
        const Domain d{sch.s, sch.r};
        in.dF_y = generator_gradient(*F, d, Variable::Kind::action);
        in.dF_x = generator_gradient(*F, d, Variable::Kind::angle);
    }
    rep.gamma_factor = in.Gamma;
    rep.H = check_hypotheses(in);
    return rep;
}

} // namespace detail

// 0-th step: e0 = 0, hbar0 from the model, P0 = eps P, xi = xi0, and the
// schedule constants for the selected mode.
inline Setup init_step0(const HamiltonianFamily &fam, double eps, const RunOptions &opt)
{
    if (fam.route == Route::direct) {
        throw InvalidArgument(fam.name + " is solved in closed form; use solve_th3");
    }
    if (!(eps >= 0.0)) {
        throw InvalidArgument("eps must be nonnegative");
    }
    if (opt.mode == Mode::paper && !(eps > 0.0)) {
        throw InvalidArgument("paper mode needs eps > 0");
    }
    if (opt.m < 2) {
        throw OrderTooLow("m must be at least 2");
    }
    if (fam.convexity && !(opt.m > fam.convexity->L + 1.0)) {
        throw OrderTooLow("m = " + num(opt.m) + " must exceed L + 1 = " + num(fam.convexity->L + 1.0));
    }
    const int n = fam.n;
    Setup su;
    su.ctx.fam = fam;
    su.ctx.opt = opt;
    su.ctx.eps = eps;
    su.ctx.target = fam.fm.eval(fam.xi0);
    su.ctx.hbar0 = fam.hbar;

    Schedule &sch = su.schedule;
    sch.mode = opt.mode;
    sch.n = n;
    sch.m = opt.m;
    sch.tau = opt.tau;
    sch.r0 = sch.r = opt.r;
    sch.Mstar = detail::derivative_norm_max(fam.hbar, opt.s);

    const double gamma_model = model_gamma(su.ctx.target, opt.tau);
    const int m_work = opt.work_order();

    if (opt.mode == Mode::paper) {
        const PaperConstants pc = paper_constants(eps, n, opt.m, opt.tau);
        sch.rho = pc.rho;
        sch.eta = pc.eta;
        sch.gamma0 = pc.gamma0;
        sch.mu0 = sch.mu = pc.mu0;
        sch.s0 = sch.s = opt.s * pc.gamma0 / (16.0 * (sch.Mstar + 2.0) * std::pow(pc.K1, opt.tau + 1.0));
    } else {
        const PaperConstants pc = paper_constants(eps > 0.0 ? eps : 1.0, n, opt.m, opt.tau);
        sch.rho = pc.rho;
        sch.eta = pc.eta;
        sch.gamma0 = eps > 0.0 ? std::min(pc.gamma0, gamma_model) : gamma_model;
        sch.s0 = sch.s = opt.s;
    }
    su.ctx.dp = DiophantineParams{sch.gamma0, opt.tau};
    su.ctx.dp.validate(n);

    KamState &st = su.state;
    st.xi = fam.xi0;
    if (fam.route == Route::action) {
        st.nf = NormalForm::unperturbed(fam.omega, fam.hbar);
        const Series p = fam.perturbation(fam.xi0, eps);
        st.P = p.with_cutoffs(m_work, std::max(1, p.fourier_cutoff()));
        st.grid = ParameterGrid::make(Vector(n, 0.0), opt.s / 4.0, opt.grid);
    } else {
        const double radius = 0.5 * (fam.fm.domain.hi[0] - fam.fm.domain.lo[0]);
        st.grid = ParameterGrid::make(fam.xi0, radius, opt.grid);
        for (const Vector &node : st.grid.nodes) {
            st.node_nf.push_back(NormalForm::unperturbed(fam.fm.eval(node), Series(n, 2, 0)));
            const Series p = fam.perturbation(node, eps);
            st.node_P.push_back(p.with_cutoffs(m_work, std::max(1, p.fourier_cutoff())));
        }
        st.nf = st.node_nf[st.grid.current];
        st.P = st.node_P[st.grid.current];
    }

    const double norm_P0 = weighted_norm(st.P, Domain{sch.s, sch.r});
    if (opt.mode == Mode::paper) {
        const double bound = sch.norm_scale(sch.s) * sch.mu0;
        if (!(norm_P0 <= bound)) {
            throw EpsilonTooLarge("|P0| = " + num(norm_P0) + " exceeds gamma0^{n+m+2} s0^m mu0 = "
                                  + num(bound));
        }
    } else {
        sch.mu0 = sch.mu = norm_P0 / sch.norm_scale(sch.s);
    }
    sch.K = plan_step(sch).K_plus;

    su.H0 = add(as_series(st.nf, Cutoffs{m_work, st.P.fourier_cutoff()}), st.P);

    const StepPlan plan = plan_step(sch);
    const Domain d{sch.s, sch.r};
    const double holder = fam.route == Route::action
                              ? detail::holder_of_translates(st.grid, st.P, fam.fm.holder_index, d)
                              : detail::holder_over_cross(st.grid, st.node_P, fam.fm.holder_index, d);
    su.initial = detail::base_report(su.ctx, sch, st.P, holder, st.xi, 0.0, st.nf.hbar, nullptr, plan, 1.0);
    return su;
}

struct StepOutcome {
    KamState state;
    Schedule schedule;
    StepReport report;
    std::optional<TransformationStep> record;
};

namespace detail
{

struct CycleResult {
    NormalForm nf;
    Series P;
    Generator gen;
    double hom_residual;
    double lie_remainder;
    TransformationStep record;
};

// truncate -> homological solve -> Lie transform -> normal-form extraction.
inline CycleResult kam_cycle(const RunContext &ctx, const NormalForm &nf, const Series &P, const Schedule &sch,
                             const StepPlan &plan)
{
    const Domain dom{sch.s, sch.r};
    const Truncation tr = truncate(P, plan.K_plus, sch.m);
    CycleResult out;
    out.gen = solve_homological(nf, tr.R, ctx.dp, HomologicalOptions{sch.m, dom});
    out.hom_residual = homological_residual(nf, out.gen, tr.R, sch.m, dom);
    const double norm_R = weighted_norm(tr.R, dom);
    // Coefficients below the prune threshold are dropped, so tiny R carry an
    // absolute residual floor.
    if (out.hom_residual > ctx.opt.homological_tol * norm_R + 100.0 * prune_threshold()) {
        throw SafetyMarginBreach("homological residual " + num(out.hom_residual) + " exceeds tolerance x |R| = " + num(norm_R));
    }
    LieOptions lo;
    lo.order = ctx.opt.lie_order;
    lo.cutoffs = Cutoffs{ctx.opt.work_order(), std::max(2 * plan.K_plus, P.fourier_cutoff())};
    lo.domain = dom;
    const LieResult lie = lie_compose(nf, P, out.gen, lo);
    Extraction ex = extract_normal_form(lie.composed, nf);
    out.nf = std::move(ex.nf);
    out.P = std::move(ex.P_plus);
    out.lie_remainder = lie.remainder_estimate;
    out.record = TransformationStep{plan.K_plus, lo.cutoffs, lo.order, dom, lo.relative_stop, out.gen.F, {}};
    return out;
}

inline Schedule finish_schedule(const Schedule &sch, const StepPlan &plan, const Series &P_plus)
{
    Schedule next = advance_schedule(sch, plan);
    const double norm = weighted_norm(P_plus, Domain{next.s, next.r});
    if (next.mode == Mode::practical) {
        next.mu = norm / next.norm_scale(next.s);
    } else if (!(norm <= next.norm_scale(next.s) * next.mu)) {
        throw Diverged("|P+| = " + num(norm) + " exceeds gamma0^{n+m+2} s+^m mu+");
    }
    next.K = plan_step(next).K_plus;
    return next;
}

} // namespace detail

// Action route: after the cycle, solve drift + grad hbar(a) = 0 for the
// action shift a and recentre y -> y + a.
inline StepOutcome action_step(const RunContext &ctx, const KamState &st, const Schedule &sch)
{
    const auto t0 = std::chrono::steady_clock::now();
    const StepPlan plan = plan_step(sch);
    detail::CycleResult cyc = detail::kam_cycle(ctx, st.nf, st.P, sch, plan);
    const Vector drift = cyc.nf.drift();
    const double dn = norm2(drift);

    double radius = 0.24 * sch.s;
    if (ctx.fam.convexity && dn > 0.0) {
        radius = std::min(radius, 4.0 * std::pow(dn / ctx.fam.convexity->sigma, 1.0 / ctx.fam.convexity->L));
    }
    const VectorMap G = detail::gradient_map(cyc.nf.hbar, drift);
    const RootResult root = find_root_by_degree(G, Box::centered(Vector(ctx.fam.n, 0.0), radius), radius * 1e-12);
    const Translation moved = translate_action(cyc.nf, cyc.P, root.xi, sch.s);

    StepOutcome out;
    out.schedule = detail::finish_schedule(sch, plan, moved.P);
    out.state = st;
    out.state.nf = moved.nf;
    out.state.P = moved.P;
    out.state.step = st.step + 1;
    for (int i = 0; i < ctx.fam.n; ++i) {
        out.state.xi[i] += root.xi[i];
    }
    cyc.record.shift = root.xi;
    out.record = cyc.record;

    const Domain nd{out.schedule.s, out.schedule.r};
    const double holder = detail::holder_of_translates(st.grid, moved.P, ctx.fam.fm.holder_index, nd);
    const Vector residual_vec = moved.nf.drift();
    out.report = detail::base_report(ctx, out.schedule, moved.P, holder, out.state.xi, dn, moved.nf.hbar, &cyc.gen.F,
                                     plan_step(out.schedule), out.schedule.alpha);
    // Hypotheses refer to the step just taken.
    {
        HypothesisInputs in;
        in.n = ctx.fam.n;
        in.m = sch.m;
        in.tau = sch.tau;
        in.rho = sch.rho;
        in.gamma0 = sch.gamma0;
        in.mu0 = sch.mu0;
        in.mu = sch.mu;
        in.s = sch.s;
        in.r = sch.r;
        in.r_plus = plan.r_plus;
        in.K_plus = plan.K_plus;
        in.alpha = out.schedule.alpha;
        in.Mstar = sch.Mstar;
        in.Gamma = gamma_factor(ctx.fam.n, sch.r, plan.r_plus, plan.K_plus, sch.tau);
        in.norm_P = weighted_norm(st.P, Domain{sch.s, sch.r});
        in.hbar_deviation = detail::derivative_norm_max(subtract(moved.nf.hbar, ctx.hbar0), sch.s);
        in.drift_norm = dn;
        const Domain d{sch.s, sch.r};
        in.dF_y = detail::generator_gradient(cyc.gen.F, d, Variable::Kind::action);
        in.dF_x = detail::generator_gradient(cyc.gen.F, d, Variable::Kind::angle);
        out.report.H = check_hypotheses(in);
        out.report.gamma_factor = in.Gamma;
    }
    out.report.K = plan.K_plus;
    out.report.xi_disp = norm2(root.xi);
    out.report.freq_residual = norm2(residual_vec);
    out.report.lie_remainder = cyc.lie_remainder;
    out.report.homological_residual = cyc.hom_residual;
    out.report.degree = root.degree;
    out.report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

// Parameter route: the cycle runs at every grid node; the frequency equation
// omega(xi) + drift(xi) = omega(xi0) is solved once on the interpolated drift
// and the current node snaps to the nearest grid point.
inline StepOutcome parameter_step(const RunContext &ctx, const KamState &st, const Schedule &sch)
{
    const auto t0 = std::chrono::steady_clock::now();
    const StepPlan plan = plan_step(sch);
    StepOutcome out;
    out.state = st;
    std::vector<Vector> drifts;
    double hom = 0.0;
    double lie_rem = 0.0;
    Series current_F;
    for (std::size_t i = 0; i < st.grid.nodes.size(); ++i) {
        detail::CycleResult cyc = detail::kam_cycle(ctx, st.node_nf[i], st.node_P[i], sch, plan);
        drifts.push_back(cyc.nf.drift());
        hom = std::max(hom, cyc.hom_residual);
        lie_rem = std::max(lie_rem, cyc.lie_remainder);
        if (static_cast<int>(i) == st.grid.current) {
            current_F = cyc.gen.F;
        }
        out.state.node_nf[i] = std::move(cyc.nf);
        out.state.node_P[i] = std::move(cyc.P);
    }
    const FrequencySolution sol = solve_frequency_equation(ctx.fam.fm, drifts, ctx.target, st.grid, 1e-12);
    out.state.grid = advance_parameter(st.grid, sol.xi_plus);
    out.state.xi = out.state.grid.xi();
    out.state.nf = out.state.node_nf[out.state.grid.current];
    out.state.P = out.state.node_P[out.state.grid.current];
    out.state.step = st.step + 1;
    out.schedule = detail::finish_schedule(sch, plan, out.state.P);

    const Domain nd{out.schedule.s, out.schedule.r};
    const double holder = detail::holder_over_cross(out.state.grid, out.state.node_P, ctx.fam.fm.holder_index, nd);
    const double dn = norm2(drifts[st.grid.current]);
    out.report = detail::base_report(ctx, out.schedule, out.state.P, holder, sol.xi_plus, dn, out.state.nf.hbar,
                                     &current_F, plan_step(out.schedule), out.schedule.alpha);
    out.report.K = plan.K_plus;
    out.report.xi_disp = out.state.grid.last_displacement;
    out.report.snap = out.state.grid.last_snap;
    out.report.freq_residual = sol.residual + out.state.grid.last_snap;
    out.report.lie_remainder = lie_rem;
    out.report.homological_residual = hom;
    out.report.degree = sol.degree;
    out.report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

inline StepOutcome kam_step(const RunContext &ctx, const KamState &st, const Schedule &sch)
{
    return ctx.fam.route == Route::parameter ? parameter_step(ctx, st, sch) : action_step(ctx, st, sch);
}

struct AssumptionReport {
    DiophantineReport diophantine;
    std::optional<int> degree;
    std::optional<ConvexityFit> convexity;
    std::string note;
};

// Diophantine margin at K, degree on the frequency-map box and weak convexity
// on the grid nodes.
inline AssumptionReport check_assumptions(const HamiltonianFamily &fam, double tau, int K, int g = 9)
{
    AssumptionReport rep;
    const Vector target = fam.fm.eval(fam.xi0);
    rep.diophantine = check_diophantine(target, DiophantineParams{model_gamma(target, tau, K), tau}, K);
    rep.note = "finite-K Diophantine check only";
    try {
        rep.degree = adaptive_degree(fam.fm.eval, fam.fm.domain, target);
    } catch (const BoundaryTooClose &) {
        rep.degree.reset();
    }
    const ParameterGrid grid = ParameterGrid::make(fam.fm.domain.center(),
                                                   0.5 * (fam.fm.domain.hi[0] - fam.fm.domain.lo[0]), g);
    std::vector<Vector> samples;
    for (int idx : grid.cross_nodes()) {
        samples.push_back(grid.nodes[idx]);
    }
    rep.convexity = fit_weak_convexity(fam.fm, samples);
    return rep;
}

struct RunResult {
    std::vector<StepReport> steps;
    KamState state;
    Schedule schedule;
    RunContext ctx;
    Series H0;
    std::vector<TransformationStep> record;
    double torus_residual = 0.0;
    bool converged = false;
};

// Gate before iterating: Diophantine margin at K = 200 and, for parameter families,
// nonzero degree and weak convexity on the grid. Action families are not gated on the
// degree; a vanishing degree surfaces from frequency matching.
inline void preflight(const Setup &su)
{
    const HamiltonianFamily &fam = su.ctx.fam;
    const DiophantineReport dio = check_diophantine(su.ctx.target, su.ctx.dp, 200);
    if (!(dio.margin > 0.0)) {
        throw ModelInfeasible("Diophantine condition fails: resonant target frequency");
    }
    if (fam.route == Route::parameter) {
        const int deg = adaptive_degree(fam.fm.eval, su.state.grid.box(), su.ctx.target);
        if (deg == 0) {
            throw ModelInfeasible("degree condition fails: degree 0 on the parameter box");
        }
        const ConvexityFit fit = fit_weak_convexity(fam.fm, su.state.grid.nodes);
        if (fit.violated) {
            throw ModelInfeasible("weak convexity fails on the parameter grid: two nodes share the same frequency");
        }
    }
}

inline RunResult run_kam(const HamiltonianFamily &fam, double eps, const RunOptions &opt)
{
    Setup su = init_step0(fam, eps, opt);
    preflight(su);
    RunResult res;
    res.ctx = su.ctx;
    res.H0 = su.H0;
    res.state = su.state;
    res.schedule = su.schedule;
    res.steps.push_back(su.initial);
    int rising = 0;
    while (true) {
        const StepReport &last = res.steps.back();
        if (last.norm_P < opt.stop_tol && res.state.step >= opt.min_steps) {
            res.converged = true;
            break;
        }
        if (res.state.step >= opt.max_steps) {
            break;
        }
        StepOutcome out;
        try {
            out = kam_step(su.ctx, res.state, res.schedule);
            if (!(out.report.freq_residual <= opt.freq_tol)) {
                throw Diverged("frequency residual " + num(out.report.freq_residual) + " exceeds tolerance");
            }
            rising = out.report.norm_P > last.norm_P ? rising + 1 : 0;
            if (rising >= opt.diverge_after) {
                throw Diverged("|P| increased for " + num(rising) + " consecutive steps");
            }
        } catch (const Error &e) {
            throw StepFailure(e, res.state.step + 1);
        }
        res.state = std::move(out.state);
        res.schedule = out.schedule;
        res.steps.push_back(out.report);
        if (out.record) {
            res.record.push_back(std::move(*out.record));
        }
    }
    res.torus_residual = torus_residual(res.state.P, res.schedule.r);
    return res;
}

// Re-applies the recorded transformations to H0.
inline Series replay(const Series &H0, std::span<const TransformationStep> record)
{
    Series H = H0;
    for (const TransformationStep &t : record) {
        LieOptions lo;
        lo.order = t.lie_order;
        lo.cutoffs = t.work;
        lo.domain = t.domain;
        lo.relative_stop = t.relative_stop;
        H = lie_compose(H, Generator{t.F}, lo).composed;
        H = translate_series(H, t.shift);
    }
    return H;
}

// |replay - (N + P)| / |N + P| on the final domain.
inline double replay_error(const Series &H0, std::span<const TransformationStep> record, const NormalForm &nf,
                           const Series &P, const Domain &d)
{
    const Series replayed = replay(H0, record);
    const Series current = add(as_series(nf, Cutoffs{P.taylor_cutoff(), P.fourier_cutoff()}), P);
    const double scale_norm = weighted_norm(current, d);
    const double diff = weighted_norm(subtract(replayed, current), d);
    return scale_norm > 0.0 ? diff / scale_norm : diff;
}

} // namespace kamiter

#endif // KAMITER_KAM_DRIVER_HPP
