#ifndef KAMITER_REPORT_HPP
#define KAMITER_REPORT_HPP

#include <cstdio>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include <kamiter/config.hpp>
#include <kamiter/errors.hpp>
#include <kamiter/kam_driver.hpp>

namespace kamiter
{

enum class ReportFormat { csv, json };

inline std::string csv_header(int n)
{
    std::string h = "step,r,s,mu,K,norm_P,holder_P";
    for (int i = 1; i <= n; ++i) {
        h += ",xi_" + std::to_string(i);
    }
    h += ",xi_disp,freq_residual";
    for (int i = 1; i <= 7; ++i) {
        h += ",H" + std::to_string(i);
    }
    return h + "\n";
}

namespace detail
{

inline std::string g17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

// Deterministic: fixed column order, %.17g floats, wall time omitted.
inline std::string emit_report(std::span<const StepReport> reports, ReportFormat format, int n)
{
    using detail::g17;
    if (format == ReportFormat::csv) {
        std::string out = csv_header(n);
        for (const StepReport &r : reports) {
            out += std::to_string(r.step) + "," + g17(r.r) + "," + g17(r.s) + "," + g17(r.mu) + "," + std::to_string(r.K)
                   + "," + g17(r.norm_P) + "," + g17(r.holder_P);
            for (int i = 0; i < n; ++i) {
                out += "," + g17(r.xi.at(i));
            }
            out += "," + g17(r.xi_disp) + "," + g17(r.freq_residual);
            for (const auto &h : r.H) {
                out += "," + g17(h.margin);
            }
            out += "\n";
        }
        return out;
    }
    nlohmann::json arr = nlohmann::json::array();
    for (const StepReport &r : reports) {
        nlohmann::json hyp = nlohmann::json::object();
        for (const auto &h : r.H) {
            hyp[h.name] = {{"satisfied", h.satisfied}, {"value", h.value}, {"bound", h.bound}, {"margin", h.margin}};
        }
        arr.push_back({{"step", r.step},
                       {"r", r.r},
                       {"s", r.s},
                       {"mu", r.mu},
                       {"K", r.K},
                       {"norm_P", r.norm_P},
                       {"holder_P", r.holder_P},
                       {"xi", r.xi},
                       {"xi_displacement", r.xi_disp},
                       {"freq_residual", r.freq_residual},
                       {"degree_at_box", r.degree},
                       {"snap_distance", r.snap},
                       {"gamma_factor", r.gamma_factor},
                       {"lie_remainder", r.lie_remainder},
                       {"homological_residual", r.homological_residual},
                       {"hypotheses", hyp}});
    }
    return arr.dump(2) + "\n";
}

inline nlohmann::json to_json(const NormalForm &nf)
{
    return {{"e", nf.e}, {"omega0", nf.omega0}, {"frequency", nf.frequency}, {"hbar", to_json(nf.hbar)}};
}

inline NormalForm normal_form_from_json(const nlohmann::json &j)
{
    NormalForm nf;
    nf.e = j.at("e").get<double>();
    nf.omega0 = j.at("omega0").get<Vector>();
    nf.frequency = j.at("frequency").get<Vector>();
    nf.hbar = series_from_json(j.at("hbar"));
    return nf;
}

inline nlohmann::json to_json(const TransformationStep &t)
{
    return {{"K", t.K},
            {"m_work", t.work.taylor},
            {"K_work", t.work.fourier},
            {"lie_order", t.lie_order},
            {"domain", {{"s", t.domain.s}, {"r", t.domain.r}}},
            {"relative_stop", t.relative_stop},
            {"generator", to_json(t.F)},
            {"shift", t.shift}};
}

inline TransformationStep transformation_from_json(const nlohmann::json &j)
{
    TransformationStep t;
    t.K = j.at("K").get<int>();
    t.work = Cutoffs{j.at("m_work").get<int>(), j.at("K_work").get<int>()};
    t.lie_order = j.at("lie_order").get<int>();
    t.domain = Domain{j.at("domain").at("s").get<double>(), j.at("domain").at("r").get<double>()};
    t.relative_stop = j.at("relative_stop").get<double>();
    t.F = series_from_json(j.at("generator"));
    t.shift = j.at("shift").get<Vector>();
    return t;
}

// Final torus and the transformation record.
inline nlohmann::json torus_json(const RunResult &res, const RunConfig &cfg)
{
    nlohmann::json steps = nlohmann::json::array();
    for (const auto &t : res.record) {
        steps.push_back(to_json(t));
    }
    return {{"config", emit_config(cfg)},
            {"model", res.ctx.fam.name},
            {"converged", res.converged},
            {"steps_taken", res.state.step},
            {"H0", to_json(res.H0)},
            {"normal_form", to_json(res.state.nf)},
            {"P", to_json(res.state.P)},
            {"xi", res.state.xi},
            {"domain", {{"s", res.schedule.s}, {"r", res.schedule.r}}},
            {"torus_residual", res.torus_residual},
            {"transformations", steps}};
}

struct ReplayCheck {
    double relative_error;
    int steps;
};

inline ReplayCheck replay_torus_json(const nlohmann::json &j)
{
    try {
        const Series H0 = series_from_json(j.at("H0"));
        std::vector<TransformationStep> record;
        for (const auto &t : j.at("transformations")) {
            record.push_back(transformation_from_json(t));
        }
        const NormalForm nf = normal_form_from_json(j.at("normal_form"));
        const Series P = series_from_json(j.at("P"));
        const Domain d{j.at("domain").at("s").get<double>(), j.at("domain").at("r").get<double>()};
        return {replay_error(H0, record, nf, P, d), static_cast<int>(record.size())};
    } catch (const nlohmann::json::exception &e) {
        throw InvalidArgument(std::string("malformed torus record: ") + e.what());
    }
}

} // namespace kamiter

#endif // KAMITER_REPORT_HPP
