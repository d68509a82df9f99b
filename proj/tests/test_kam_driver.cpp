#include <cmath>
#include <fstream>

#include <gtest/gtest.h>

#include <kamiter/kam_driver.hpp>

using namespace kamiter;

namespace
{

HamiltonianFamily custom_drift()
{
    std::ifstream in(KAMITER_SOURCE_DIR "/configs/custom_drift.json");
    return make_custom(nlohmann::json::parse(in));
}

RunOptions four_steps()
{
    RunOptions opt;
    opt.min_steps = 4;
    return opt;
}

const RunResult &pro2_run()
{
    static const RunResult res = run_kam(make_pro2(1, golden_omega(), 2), 1e-6, four_steps());
    return res;
}

} // namespace

TEST(InitStep0, PracticalMuDefinition)
{
    const kamiter::Setup su = init_step0(make_pro2(1, golden_omega(), 2), 1e-6, RunOptions{});
    const Schedule &s = su.schedule;
    const double norm = weighted_norm(su.state.P, Domain{s.s, s.r});
    EXPECT_DOUBLE_EQ(s.mu0, norm / (std::pow(s.gamma0, s.n + s.m + 2) * std::pow(s.s, s.m)));
    EXPECT_NEAR(norm, 1e-6 * std::exp(0.5), 1e-20);
    EXPECT_DOUBLE_EQ(s.gamma0, std::min(std::pow(1e-6, 1.0 / 36.0), model_gamma(golden_omega(), 2.0)));
}

TEST(InitStep0, PaperModeGateRejectsModerateEps)
{
    RunOptions opt;
    opt.mode = Mode::paper;
    EXPECT_THROW(init_step0(make_pro2(1, golden_omega(), 2), 1e-8, opt), EpsilonTooLarge);
}

TEST(InitStep0, OrderMustExceedLPlusOne)
{
    RunOptions opt;
    opt.m = 4;
    EXPECT_THROW(init_step0(make_pro2(1, golden_omega(), 2), 1e-6, opt), OrderTooLow);
}

TEST(RunKam, ZeroEpsConvergesImmediately)
{
    const RunResult res = run_kam(make_pro2(1, golden_omega(), 2), 0.0, RunOptions{});
    EXPECT_TRUE(res.converged);
    EXPECT_EQ(res.state.step, 0);
    EXPECT_EQ(res.steps.size(), 1u);
    EXPECT_EQ(res.torus_residual, 0.0);
    EXPECT_TRUE(res.record.empty());
}

TEST(RunKam, Pro2FirstStepContracts)
{
    const RunResult &res = pro2_run();
    ASSERT_GE(res.steps.size(), 2u);
    EXPECT_LE(res.steps[1].norm_P / res.steps[0].norm_P, 1e-2);
    EXPECT_LE(res.steps[1].freq_residual, 1e-9);
    // drift vanishes identically for a pure cosine, so the action never moves
    EXPECT_EQ(res.steps[1].xi_disp, 0.0);
}

TEST(RunKam, Pro2Converges)
{
    const RunResult &res = pro2_run();
    EXPECT_TRUE(res.converged);
    EXPECT_GE(res.state.step, 4);
    for (std::size_t i = 1; i < res.steps.size(); ++i) {
        EXPECT_LT(res.steps[i].norm_P, res.steps[i - 1].norm_P);
        EXPECT_LE(res.steps[i].freq_residual, 1e-9);
        EXPECT_LE(res.steps[i].homological_residual, 1e-10 * res.steps[i - 1].norm_P + 1e-28);
    }
    EXPECT_LT(res.steps.back().norm_P, 1e-12);
    EXPECT_LE(res.torus_residual, 1e-12);
}

TEST(RunKam, Pro2ReplayReproducesState)
{
    const RunResult &res = pro2_run();
    EXPECT_LE(replay_error(res.H0, res.record, res.state.nf, res.state.P, Domain{res.schedule.s, res.schedule.r}),
              1e-10);
}

TEST(RunKam, ActionShiftMatchesClosedForm)
{
    const double eps = 1e-6;
    RunOptions opt = four_steps();
    opt.max_steps = 1;
    opt.min_steps = 1;
    const RunResult res = run_kam(custom_drift(), eps, opt);
    ASSERT_EQ(res.steps.size(), 2u);
    // drift (eps, 0) is cancelled by grad |y|^4/4 at a = (-eps^{1/3}, 0)
    EXPECT_NEAR(res.state.xi[0], -std::cbrt(eps), 1e-9);
    EXPECT_NEAR(res.state.xi[1], 0.0, 1e-12);
    EXPECT_LE(res.steps[1].freq_residual, 1e-9);
    ASSERT_EQ(res.record.size(), 1u);
    EXPECT_NEAR(res.record[0].shift[0], -std::cbrt(eps), 1e-9);
}

TEST(RunKam, ActionRouteReplayWithShifts)
{
    const RunResult res = run_kam(custom_drift(), 1e-6, four_steps());
    EXPECT_TRUE(res.converged);
    EXPECT_LE(replay_error(res.H0, res.record, res.state.nf, res.state.P, Domain{res.schedule.s, res.schedule.r}),
              1e-10);
    for (std::size_t i = 2; i < res.steps.size(); ++i) {
        EXPECT_LE(res.steps[i].xi_disp, res.steps[i - 1].xi_disp);
    }
}

TEST(RunKam, Cor1HasNoRealSolution)
{
    for (double eps : {1e-3, 1e-4, 1e-5}) {
        try {
            run_kam(make_cor1(1), eps, RunOptions{});
            FAIL() << "cor1 must not converge";
        } catch (const StepFailure &e) {
            EXPECT_TRUE(e.infeasible());
            EXPECT_EQ(std::string(e.kind()), "DegreeVanished");
            EXPECT_EQ(e.step(), 1);
        }
    }
}

TEST(RunKam, Pro1IsRejectedBeforeIterating)
{
    try {
        run_kam(make_pro1(1), 1e-3, RunOptions{});
        FAIL() << "pro1 violates weak convexity";
    } catch (const ModelInfeasible &e) {
        EXPECT_TRUE(e.infeasible());
    }
}

TEST(KamStep, FailureLeavesStateUntouched)
{
    const kamiter::Setup su = init_step0(make_cor1(1), 1e-4, RunOptions{});
    const KamState before = su.state;
    EXPECT_THROW(kam_step(su.ctx, su.state, su.schedule), DegreeVanished);
    EXPECT_EQ(su.state.P.terms(), before.P.terms());
    EXPECT_EQ(su.state.nf.frequency, before.nf.frequency);
    EXPECT_EQ(su.state.xi, before.xi);
    EXPECT_EQ(su.state.step, before.step);
}

TEST(KamStep, ZeroPerturbationOnlyAdvancesSchedule)
{
    const kamiter::Setup su = init_step0(make_pro2(1, golden_omega(), 2), 0.0, RunOptions{});
    const StepOutcome out = kam_step(su.ctx, su.state, su.schedule);
    EXPECT_TRUE(out.state.P.empty());
    EXPECT_EQ(out.state.nf.frequency, su.state.nf.frequency);
    EXPECT_EQ(out.state.xi, su.state.xi);
    EXPECT_EQ(out.schedule.nu, su.schedule.nu + 1);
    EXPECT_LT(out.schedule.r, su.schedule.r);
}

TEST(Assumptions, Pro2AndCor1Degrees)
{
    const AssumptionReport pro2 = check_assumptions(make_pro2(1, golden_omega(), 2), 2.0, 50);
    ASSERT_TRUE(pro2.degree.has_value());
    EXPECT_EQ(*pro2.degree, 1);
    ASSERT_TRUE(pro2.convexity.has_value());
    EXPECT_FALSE(pro2.convexity->violated);
    EXPECT_EQ(pro2.convexity->L, 3.0);

    const AssumptionReport cor1 = check_assumptions(make_cor1(1), 2.0, 50);
    ASSERT_TRUE(cor1.degree.has_value());
    EXPECT_EQ(*cor1.degree, 0);
}

TEST(TorusResidual, OnlyYZeroTermsCount)
{
    Series P(2, 4, 4);
    P.add_term(make_monomial({1, 0}, {2, 0}), 1.0);
    EXPECT_EQ(torus_residual(P, 0.5), 0.0);
    P.add_term(make_monomial({0, 1}, {1, 0}), 1.0);
    EXPECT_NEAR(torus_residual(P, 0.5), std::exp(0.5), 1e-15);
}
