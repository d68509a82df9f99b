#ifndef KAMITER_CLI_HPP
#define KAMITER_CLI_HPP

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <kamiter/assumptions.hpp>
#include <kamiter/config.hpp>
#include <kamiter/errors.hpp>
#include <kamiter/frequency_matching.hpp>
#include <kamiter/kam_driver.hpp>
#include <kamiter/model_zoo.hpp>
#include <kamiter/report.hpp>

namespace kamiter
{

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInfeasible = 2;

namespace cli
{

inline std::string read_file(const std::string &path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path &path, const std::string &content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InvalidArgument("cannot write '" + path.string() + "'");
    }
    out << content;
}

struct Overrides {
    std::string config;
    std::vector<std::pair<std::string, std::string>> keys;
};

inline void add_override(CLI::App *app, Overrides &ov, const std::string &flag, const std::string &key,
                         const std::string &help)
{
    app->add_option_function<std::string>(
        flag, [&ov, key](const std::string &v) { ov.keys.emplace_back(key, v); }, help);
}

inline RunConfig build_config(const Overrides &ov)
{
    RunConfig c;
    std::string text;
    if (!ov.config.empty()) {
        text = read_file(ov.config);
    }
    // Later lines override earlier ones: rebuild the document without duplicates.
    std::map<std::string, std::string> merged;
    std::vector<std::string> order;
    if (!text.empty()) {
        const RunConfig base = parse_config(text);
        std::istringstream in(emit_config(base));
        std::string line;
        while (std::getline(in, line)) {
            const auto eq = line.find('=');
            const std::string k = detail::trim(line.substr(0, eq));
            merged[k] = detail::trim(line.substr(eq + 1));
            order.push_back(k);
        }
    }
    for (const auto &[k, v] : ov.keys) {
        if (!merged.count(k)) {
            order.push_back(k);
        }
        merged[k] = v;
    }
    std::string doc;
    for (const auto &k : order) {
        doc += k + " = " + merged[k] + "\n";
    }
    return parse_config(doc);
}

inline int run_direct(const HamiltonianFamily &fam, const RunConfig &cfg, std::ostream &out)
{
    const Th3Result r = solve_th3(fam, cfg.eps);
    nlohmann::json j = {{"model", fam.name},
                        {"eps", cfg.eps},
                        {"outcome", to_string(r.outcome)},
                        {"expected", to_string(fam.expected(cfg.eps))},
                        {"roots", r.roots}};
    std::filesystem::create_directories(cfg.out);
    write_file(std::filesystem::path(cfg.out) / "result.json", j.dump(2) + "\n");
    out << j.dump() << "\n";
    return r.outcome == Outcome::destroyed ? kExitInfeasible : kExitOk;
}

inline int cmd_run(const RunConfig &cfg, std::ostream &out)
{
    const HamiltonianFamily fam = make_model(cfg.model, cfg.model_params());
    if (fam.route == Route::direct) {
        return run_direct(fam, cfg, out);
    }
    const RunResult res = run_kam(fam, cfg.eps, cfg.run_options());
    std::filesystem::create_directories(cfg.out);
    const std::filesystem::path dir(cfg.out);
    write_file(dir / "steps.csv", emit_report(res.steps, ReportFormat::csv, fam.n));
    write_file(dir / "steps.json", emit_report(res.steps, ReportFormat::json, fam.n));
    write_file(dir / "torus.json", torus_json(res, cfg).dump(1) + "\n");
    write_file(dir / "config.txt", emit_config(cfg));
    const StepReport &last = res.steps.back();
    out << "model " << fam.name << ": " << (res.converged ? "converged" : "not converged") << " after " << res.state.step
        << " steps, |P| = " << detail::g17(last.norm_P) << ", torus residual = " << detail::g17(res.torus_residual)
        << "\n";
    return res.converged ? kExitOk : kExitError;
}

inline nlohmann::json assumptions_json(const HamiltonianFamily &fam, double tau, int K)
{
    const AssumptionReport rep = check_assumptions(fam, tau, K);
    nlohmann::json j;
    j["model"] = fam.name;
    j["diophantine"] = {{"margin", rep.diophantine.margin}, {"worst_k", rep.diophantine.worst_k}, {"note", rep.note}};
    j["degree"] = rep.degree ? nlohmann::json(*rep.degree) : nlohmann::json(nullptr);
    if (rep.convexity) {
        j["convexity"] = {{"sigma", rep.convexity->sigma}, {"L", rep.convexity->L}, {"violated", rep.convexity->violated}};
    } else {
        j["convexity"] = nullptr;
    }
    return j;
}

struct CounterexampleRow {
    int k;
    double eps;
    double p0;
    std::optional<double> xi2;
    std::string error;
};

// Solves omega(xi) + (0, P0(eps_k)) = omega_bar on the pro1 grid for
// eps_k = 1/(k pi + pi/2).
inline std::vector<CounterexampleRow> counterexample_sweep(int ell, int kmax, int g)
{
    const HamiltonianFamily fam = make_pro1(ell);
    const ParameterGrid grid = ParameterGrid::make(fam.xi0, 1.0, g);
    std::vector<CounterexampleRow> rows;
    for (int k = 1; k <= kmax; ++k) {
        const double eps = 1.0 / (k * std::numbers::pi + std::numbers::pi / 2.0);
        CounterexampleRow row{k, eps, pro1_p0(eps, ell), std::nullopt, {}};
        const std::vector<Vector> drift(grid.nodes.size(), Vector{0.0, row.p0});
        try {
            row.xi2 = solve_frequency_equation(fam.fm, drift, fam.omega, grid, 1e-12).xi_plus[1];
        } catch (const Error &e) {
            if (!e.infeasible()) {
                throw;
            }
            row.error = e.what();
        }
        rows.push_back(row);
    }
    return rows;
}

inline int cmd_demo_counterexample(int ell, int kmax, int g, std::ostream &out)
{
    const HamiltonianFamily fam = make_pro1(ell);
    const ParameterGrid grid = ParameterGrid::make(fam.xi0, 1.0, g);
    const ConvexityFit fit = fit_weak_convexity(fam.fm, grid.nodes);
    out << nlohmann::json({{"convexity_violated", fit.violated}}).dump() << "\n";
    bool all_solved = true;
    for (const auto &row : counterexample_sweep(ell, kmax, g)) {
        nlohmann::json j = {{"k", row.k}, {"eps", row.eps}, {"P0", row.p0}};
        if (row.xi2) {
            j["xi2"] = *row.xi2;
        } else {
            j["error"] = row.error;
            all_solved = false;
        }
        out << j.dump() << "\n";
    }
    return all_solved ? kExitOk : kExitInfeasible;
}

inline int cmd_demo_no_solution(int ell, const std::vector<double> &eps_list, std::ostream &out)
{
    const HamiltonianFamily fam = make_cor1(ell);
    int code = kExitOk;
    for (double eps : eps_list) {
        try {
            RunOptions opt;
            const RunResult res = run_kam(fam, eps, opt);
            out << "eps " << detail::g17(eps) << ": solved after " << res.state.step << " steps\n";
        } catch (const Error &e) {
            if (!e.infeasible()) {
                throw;
            }
            out << "eps " << detail::g17(eps) << ": no real solution in G (" << e.what() << ")\n";
            code = kExitInfeasible;
        }
    }
    return code;
}

inline int cmd_replay(const std::string &path, double tol, std::ostream &out)
{
    const nlohmann::json j = nlohmann::json::parse(read_file(path));
    const ReplayCheck rc = replay_torus_json(j);
    out << "replayed " << rc.steps << " steps, relative majorant error " << detail::g17(rc.relative_error) << "\n";
    return rc.relative_error <= tol ? kExitOk : kExitError;
}

} // namespace cli

inline int run_cli(int argc, char **argv, std::ostream &out = std::cout, std::ostream &err = std::cerr)
{
    CLI::App app{"kamiter: numerical KAM iteration with frequency matching"};
    app.require_subcommand(1);

    cli::Overrides ov;
    CLI::App *run = app.add_subcommand("run", "run the KAM iteration");
    run->add_option("--config", ov.config, "flat key = value config file");
    cli::add_override(run, ov, "--model", "model", "model name");
    cli::add_override(run, ov, "--eps", "eps", "perturbation size");
    cli::add_override(run, ov, "--m", "m", "Taylor order");
    cli::add_override(run, ov, "--tau", "tau", "Diophantine exponent");
    cli::add_override(run, ov, "--mode", "mode", "paper or practical");
    cli::add_override(run, ov, "--grid", "grid", "grid points per axis (odd)");
    cli::add_override(run, ov, "--out", "out", "output directory");
    cli::add_override(run, ov, "--max-steps", "max_steps", "step limit");
    cli::add_override(run, ov, "--min-steps", "min_steps", "steps taken before the stop test applies");
    cli::add_override(run, ov, "--stop-tol", "tol.stop", "stop when |P| falls below");
    cli::add_override(run, ov, "--l", "model.l", "pro2 exponent l");
    cli::add_override(run, ov, "--ell", "model.ell", "th3/pro1/cor1 exponent");
    cli::add_override(run, ov, "--case", "model.case", "th3 case");
    cli::add_override(run, ov, "--model-path", "model.path", "custom model JSON");

    std::string ca_model = "pro2";
    double ca_tau = 2.0;
    int ca_K = 50;
    ModelParams ca_params;
    CLI::App *ca = app.add_subcommand("check-assumptions", "report degree, weak convexity and Diophantine diagnostics");
    ca->add_option("--model", ca_model, "model name");
    ca->add_option("--tau", ca_tau, "Diophantine exponent");
    ca->add_option("--K", ca_K, "Diophantine cutoff");
    ca->add_option("--l", ca_params.l, "pro2 exponent l");
    ca->add_option("--ell", ca_params.ell, "th3/pro1/cor1 exponent");
    ca->add_option("--model-path", ca_params.custom_path, "custom model JSON");

    int ce_ell = 1;
    int ce_kmax = 6;
    int ce_grid = 9;
    CLI::App *ce = app.add_subcommand("demo-counterexample", "pro1 sweep over eps_k = 1/(k pi + pi/2)");
    ce->add_option("--ell", ce_ell, "exponent in P0 = eps^ell sin(1/eps)");
    ce->add_option("--kmax", ce_kmax, "largest k");
    ce->add_option("--grid", ce_grid, "grid points per axis");

    int ns_ell = 1;
    std::vector<double> ns_eps{1e-3, 1e-4, 1e-5};
    CLI::App *ns = app.add_subcommand("demo-no-solution", "cor1 frequency equation without real solution");
    ns->add_option("--ell", ns_ell, "exponent ell");
    ns->add_option("--eps", ns_eps, "eps values");

    std::string rp_path;
    double rp_tol = 1e-10;
    CLI::App *rp = app.add_subcommand("replay", "re-compose a transformation record and verify it");
    rp->add_option("torus", rp_path, "torus.json written by run")->required();
    rp->add_option("--tol", rp_tol, "relative tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (run->parsed()) {
            return cli::cmd_run(cli::build_config(ov), out);
        }
        if (ca->parsed()) {
            out << cli::assumptions_json(make_model(ca_model, ca_params), ca_tau, ca_K).dump(2) << "\n";
            return kExitOk;
        }
        if (ce->parsed()) {
            return cli::cmd_demo_counterexample(ce_ell, ce_kmax, ce_grid, out);
        }
        if (ns->parsed()) {
            return cli::cmd_demo_no_solution(ns_ell, ns_eps, out);
        }
        if (rp->parsed()) {
            return cli::cmd_replay(rp_path, rp_tol, out);
        }
    } catch (const Error &e) {
        err << "kamiter: " << e.what() << "\n";
        return e.infeasible() ? kExitInfeasible : kExitError;
    } catch (const std::exception &e) {
        err << "kamiter: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}

} // namespace kamiter

#endif // KAMITER_CLI_HPP
