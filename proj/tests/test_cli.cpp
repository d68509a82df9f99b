#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include <kamiter/cli.hpp>

using namespace kamiter;

namespace
{

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult invoke(std::vector<std::string> args)
{
    args.insert(args.begin(), "kamiter");
    std::vector<char *> argv;
    for (auto &a : args) {
        argv.push_back(a.data());
    }
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string &name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("kamiter_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

std::string slurp(const std::filesystem::path &p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string message_of(const std::string &text)
{
    try {
        parse_config(text);
    } catch (const ConfigError &e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST(Config, Defaults)
{
    const RunConfig c = parse_config("model = pro2\neps = 1e-6\n");
    EXPECT_EQ(c.model, "pro2");
    EXPECT_EQ(c.eps, 1e-6);
    EXPECT_EQ(c.m, 5);
    EXPECT_EQ(c.tau, 2.0);
    EXPECT_EQ(c.mode, Mode::practical);
    EXPECT_EQ(c.grid, 9);
    EXPECT_EQ(c.stop_tol, 1e-12);
    EXPECT_EQ(c.freq_tol, 1e-9);
    EXPECT_EQ(c.homological_tol, 1e-10);
    EXPECT_EQ(c.out, "out");
    EXPECT_EQ(c.seed, 20240601u);
    EXPECT_EQ(c.max_steps, 12);
}

TEST(Config, EvenGridRejected)
{
    EXPECT_NE(message_of("model = pro2\neps = 1e-6\ngrid = 8\n").find("grid size must be odd"), std::string::npos);
}

TEST(Config, UnknownKeyNamed)
{
    EXPECT_NE(message_of("model = pro2\nepsilonn = 1e-6\n").find("epsilonn"), std::string::npos);
}

TEST(Config, ErrorsNameTheKey)
{
    EXPECT_NE(message_of("eps = 1e-6\n").find("'model'"), std::string::npos);
    EXPECT_NE(message_of("model = pro2\n").find("'eps'"), std::string::npos);
    EXPECT_NE(message_of("model = pro2\neps = abc\n").find("'eps'"), std::string::npos);
    EXPECT_NE(message_of("model = pro2\neps = 1\neps = 2\n").find("twice"), std::string::npos);
    EXPECT_NE(message_of("model = pro2\neps = 1\nmode = fast\n").find("'mode'"), std::string::npos);
    EXPECT_NE(message_of("model = pro9\neps = 1\n").find("pro9"), std::string::npos);
    EXPECT_NE(message_of("model = custom\neps = 1\n").find("model.path"), std::string::npos);
    EXPECT_NE(message_of("model = pro2\neps = 1\njunk\n").find("line 3"), std::string::npos);
}

TEST(Config, CommentsAndQuotes)
{
    const RunConfig c = parse_config("# header\nmodel = \"pro2\"  # trailing\n\neps = 1e-6\nout = \"a b\"\n");
    EXPECT_EQ(c.model, "pro2");
    EXPECT_EQ(c.out, "a b");
}

TEST(Config, EmitRoundTrips)
{
    RunConfig c = parse_config("model = th3_case1\neps = -1e-4\nmodel.ell = 2\ntau = 2.5\nmode = paper\n");
    EXPECT_EQ(parse_config(emit_config(c)), c);
    c.eps = 0.1;
    c.stop_tol = 1.0 / 3.0;
    EXPECT_EQ(parse_config(emit_config(c)), c);
    EXPECT_EQ(emit_config(parse_config(emit_config(c))), emit_config(c));
}

TEST(Config, ShippedFilesParse)
{
    for (const char *name : {"pro2.cfg", "cor1.cfg", "th3_case1.cfg", "custom_drift.cfg"}) {
        std::ifstream in(std::string(KAMITER_SOURCE_DIR "/configs/") + name);
        std::stringstream ss;
        ss << in.rdbuf();
        EXPECT_NO_THROW(parse_config(ss.str())) << name;
    }
}

TEST(Report, EmptyRunHasHeaderOnly)
{
    const std::vector<StepReport> none;
    EXPECT_EQ(emit_report(none, ReportFormat::csv, 2),
              "step,r,s,mu,K,norm_P,holder_P,xi_1,xi_2,xi_disp,freq_residual,H1,H2,H3,H4,H5,H6,H7\n");
    EXPECT_EQ(emit_report(none, ReportFormat::json, 2), "[]\n");
}

TEST(Report, OneStepRowHasAllHypotheses)
{
    RunOptions opt;
    opt.max_steps = 1;
    opt.min_steps = 1;
    const RunResult res = run_kam(make_pro2(1, golden_omega(), 2), 1e-6, opt);
    ASSERT_EQ(res.steps.size(), 2u);
    const std::string csv = emit_report(res.steps, ReportFormat::csv, 2);
    std::istringstream in(csv);
    std::string header;
    std::string row0;
    std::string row1;
    std::getline(in, header);
    std::getline(in, row0);
    std::getline(in, row1);
    const auto count = [](const std::string &s) { return std::count(s.begin(), s.end(), ','); };
    EXPECT_EQ(count(row1), count(header));
    EXPECT_EQ(row1.rfind("1,", 0), 0u);

    const auto j = nlohmann::json::parse(emit_report(res.steps, ReportFormat::json, 2));
    ASSERT_EQ(j.size(), 2u);
    for (const char *h : {"H1", "H2", "H3", "H4", "H5", "H6", "H7"}) {
        EXPECT_TRUE(j[1]["hypotheses"].contains(h)) << h;
        EXPECT_TRUE(j[1]["hypotheses"][h].contains("margin")) << h;
    }
    EXPECT_EQ(j[1]["step"], 1);
}

TEST(Report, Deterministic)
{
    RunOptions opt;
    opt.min_steps = 2;
    opt.max_steps = 2;
    const RunResult a = run_kam(make_pro2(1, golden_omega(), 2), 1e-6, opt);
    const RunResult b = run_kam(make_pro2(1, golden_omega(), 2), 1e-6, opt);
    EXPECT_EQ(emit_report(a.steps, ReportFormat::csv, 2), emit_report(b.steps, ReportFormat::csv, 2));
    EXPECT_EQ(emit_report(a.steps, ReportFormat::json, 2), emit_report(b.steps, ReportFormat::json, 2));
}

TEST(Cli, RunWritesArtifactsAndReplays)
{
    const auto dir = scratch("run");
    const CliResult r = invoke({"run", "--config", KAMITER_SOURCE_DIR "/configs/pro2.cfg", "--out", dir.string()});
    EXPECT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NE(r.out.find("converged"), std::string::npos);
    for (const char *f : {"steps.csv", "steps.json", "torus.json", "config.txt"}) {
        EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
    }
    const RunConfig written = parse_config(slurp(dir / "config.txt"));
    EXPECT_EQ(written.out, dir.string());
    EXPECT_EQ(written.min_steps, 4);

    const CliResult rp = invoke({"replay", (dir / "torus.json").string()});
    EXPECT_EQ(rp.code, kExitOk) << rp.out << rp.err;
}

TEST(Cli, OverrideBeatsConfigFile)
{
    const auto dir = scratch("override");
    const CliResult r = invoke({"run", "--config", KAMITER_SOURCE_DIR "/configs/pro2.cfg", "--out", dir.string(),
                                "--max-steps", "1", "--min-steps", "1", "--stop-tol", "1e-300"});
    EXPECT_EQ(r.code, kExitError);
    EXPECT_EQ(parse_config(slurp(dir / "config.txt")).max_steps, 1);
}

TEST(Cli, Th3Outcomes)
{
    const auto dir = scratch("th3");
    const CliResult two = invoke({"run", "--model", "th3_case1", "--eps", "-1e-4", "--out", dir.string()});
    EXPECT_EQ(two.code, kExitOk) << two.err;
    EXPECT_NE(two.out.find("two_tori"), std::string::npos);
    const CliResult gone = invoke({"run", "--model", "th3_case1", "--eps", "1e-4", "--out", dir.string()});
    EXPECT_EQ(gone.code, kExitInfeasible);
    EXPECT_NE(gone.out.find("destroyed"), std::string::npos);
}

TEST(Cli, NoSolutionDemo)
{
    const CliResult r = invoke({"demo-no-solution"});
    EXPECT_EQ(r.code, kExitInfeasible);
    EXPECT_NE(r.out.find("no real solution"), std::string::npos);
}

TEST(Cli, Cor1RunIsInfeasible)
{
    const auto dir = scratch("cor1");
    const CliResult r = invoke({"run", "--model", "cor1", "--eps", "1e-4", "--out", dir.string()});
    EXPECT_EQ(r.code, kExitInfeasible);
    EXPECT_NE(r.err.find("DegreeVanished"), std::string::npos) << r.err;
}

TEST(Cli, CheckAssumptionsJson)
{
    const CliResult r = invoke({"check-assumptions", "--model", "pro2"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["degree"], 1);
}

TEST(Cli, BadUsage)
{
    EXPECT_EQ(invoke({}).code, kExitError);
    EXPECT_EQ(invoke({"frobnicate"}).code, kExitError);
    const CliResult r = invoke({"run", "--model", "pro2", "--eps", "1e-6", "--grid", "8"});
    EXPECT_EQ(r.code, kExitError);
    EXPECT_NE(r.err.find("grid size must be odd"), std::string::npos);
}

TEST(Cli, BinaryExitCodes)
{
    const std::string bin = KAMITER_CLI_PATH;
    EXPECT_EQ(WEXITSTATUS(std::system((bin + " demo-no-solution > /dev/null").c_str())), kExitInfeasible);
    EXPECT_EQ(WEXITSTATUS(std::system((bin + " run --model th3_case2 --eps 1e-4 --out "
                                       + scratch("bin").string() + " > /dev/null")
                                          .c_str())),
              kExitOk);
}
