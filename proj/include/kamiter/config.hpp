#ifndef KAMITER_CONFIG_HPP
#define KAMITER_CONFIG_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>

#include <kamiter/errors.hpp>
#include <kamiter/kam_driver.hpp>
#include <kamiter/model_zoo.hpp>

namespace kamiter
{

struct RunConfig {
    std::string model;
    int l = 1;
    int ell = 1;
    int th3_case = 1;
    std::string model_path;
    double eps = 0.0;
    int m = 5;
    double tau = 2.0;
    Mode mode = Mode::practical;
    int grid = 9;
    double stop_tol = 1e-12;
    double freq_tol = 1e-9;
    double homological_tol = 1e-10;
    std::string out = "out";
    std::uint64_t seed = 20240601;
    int max_steps = 12;
    int min_steps = 0;

    bool operator==(const RunConfig &) const = default;

    ModelParams model_params() const
    {
        return ModelParams{l, ell, th3_case, model_path};
    }

    RunOptions run_options() const
    {
        RunOptions o;
        o.mode = mode;
        o.m = m;
        o.tau = tau;
        o.grid = grid;
        o.stop_tol = stop_tol;
        o.freq_tol = freq_tol;
        o.homological_tol = homological_tol;
        o.max_steps = max_steps;
        o.min_steps = min_steps;
        return o;
    }
};

namespace detail
{

inline std::string trim(const std::string &s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::string unquote(const std::string &v)
{
    if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) {
        return v.substr(1, v.size() - 2);
    }
    return v;
}

template <typename T>
T parse_number(const std::string &key, const std::string &value)
{
    T out{};
    const char *first = value.data();
    const char *last = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last) {
        throw ConfigError("key '" + key + "': cannot parse '" + value + "' as a number");
    }
    return out;
}

inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

inline void validate(const RunConfig &c)
{
    bool known = false;
    for (const auto &name : model_names()) {
        known = known || name == c.model;
    }
    if (!known) {
        throw ConfigError("key 'model': unknown model '" + c.model + "'");
    }
    if (c.model == "custom" && c.model_path.empty()) {
        throw ConfigError("key 'model.path': required for the custom model");
    }
    if (!std::isfinite(c.eps)) {
        throw ConfigError("key 'eps': must be finite");
    }
    if (c.grid < 3 || c.grid % 2 == 0) {
        throw ConfigError("key 'grid': grid size must be odd and at least 3");
    }
    if (!(c.stop_tol > 0.0) || !(c.freq_tol > 0.0) || !(c.homological_tol > 0.0)) {
        throw ConfigError("key 'tol.*': tolerances must be positive");
    }
    if (c.m < 2) {
        throw ConfigError("key 'm': must be at least 2");
    }
    if (!(c.tau > 0.0)) {
        throw ConfigError("key 'tau': must be positive");
    }
    if (c.l < 1 || c.ell < 1) {
        throw ConfigError("key 'model.l'/'model.ell': must be at least 1");
    }
    if (c.th3_case != 1 && c.th3_case != 2) {
        throw ConfigError("key 'model.case': must be 1 or 2");
    }
    if (c.max_steps < 0 || c.min_steps < 0) {
        throw ConfigError("key 'max_steps'/'min_steps': must be nonnegative");
    }
}

// Sets one key; shared by the file parser and CLI overrides.
inline void set_key(RunConfig &c, const std::string &key, const std::string &raw)
{
    const std::string v = detail::unquote(raw);
    using detail::parse_number;
    if (key == "model") {
        c.model = v;
    } else if (key == "model.l") {
        c.l = parse_number<int>(key, v);
    } else if (key == "model.ell") {
        c.ell = parse_number<int>(key, v);
    } else if (key == "model.case") {
        c.th3_case = parse_number<int>(key, v);
    } else if (key == "model.path") {
        c.model_path = v;
    } else if (key == "eps") {
        c.eps = parse_number<double>(key, v);
    } else if (key == "m") {
        c.m = parse_number<int>(key, v);
    } else if (key == "tau") {
        c.tau = parse_number<double>(key, v);
    } else if (key == "mode") {
        if (v == "paper") {
            c.mode = Mode::paper;
        } else if (v == "practical") {
            c.mode = Mode::practical;
        } else {
            throw ConfigError("key 'mode': expected 'paper' or 'practical', got '" + v + "'");
        }
    } else if (key == "grid") {
        c.grid = parse_number<int>(key, v);
    } else if (key == "tol.stop") {
        c.stop_tol = parse_number<double>(key, v);
    } else if (key == "tol.freq") {
        c.freq_tol = parse_number<double>(key, v);
    } else if (key == "tol.homological") {
        c.homological_tol = parse_number<double>(key, v);
    } else if (key == "out") {
        c.out = v;
    } else if (key == "seed") {
        c.seed = parse_number<std::uint64_t>(key, v);
    } else if (key == "max_steps") {
        c.max_steps = parse_number<int>(key, v);
    } else if (key == "min_steps") {
        c.min_steps = parse_number<int>(key, v);
    } else {
        throw ConfigError("unknown key '" + key + "'");
    }
}

// Flat `key = value` lines; `#` starts a comment. `model` and `eps` are
// required, everything else has a default.
inline RunConfig parse_config(const std::string &text)
{
    RunConfig c;
    std::map<std::string, int> seen;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.resize(hash);
        }
        line = detail::trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (seen.count(key)) {
            throw ConfigError("key '" + key + "': given twice (lines " + std::to_string(seen[key]) + " and "
                              + std::to_string(lineno) + ")");
        }
        seen[key] = lineno;
        set_key(c, key, value);
    }
    if (!seen.count("model")) {
        throw ConfigError("key 'model': required");
    }
    if (!seen.count("eps")) {
        throw ConfigError("key 'eps': required");
    }
    validate(c);
    return c;
}

inline std::string emit_config(const RunConfig &c)
{
    using detail::format_double;
    std::ostringstream out;
    out << "model = " << c.model << "\n";
    out << "model.l = " << c.l << "\n";
    out << "model.ell = " << c.ell << "\n";
    out << "model.case = " << c.th3_case << "\n";
    if (!c.model_path.empty()) {
        out << "model.path = " << c.model_path << "\n";
    }
    out << "eps = " << format_double(c.eps) << "\n";
    out << "m = " << c.m << "\n";
    out << "tau = " << format_double(c.tau) << "\n";
    out << "mode = " << to_string(c.mode) << "\n";
    out << "grid = " << c.grid << "\n";
    out << "tol.stop = " << format_double(c.stop_tol) << "\n";
    out << "tol.freq = " << format_double(c.freq_tol) << "\n";
    out << "tol.homological = " << format_double(c.homological_tol) << "\n";
    out << "out = " << c.out << "\n";
    out << "seed = " << c.seed << "\n";
    out << "max_steps = " << c.max_steps << "\n";
    out << "min_steps = " << c.min_steps << "\n";
    return out.str();
}

} // namespace kamiter

#endif // KAMITER_CONFIG_HPP
