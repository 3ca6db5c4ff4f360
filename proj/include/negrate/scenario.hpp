#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "coefficient.hpp"
#include "errors.hpp"
#include "kernels.hpp"
#include "model.hpp"
#include "power.hpp"

namespace negrate {

enum class Analytics { Case1, Case2, Generic };

inline std::string_view to_string(Analytics a) {
    switch (a) {
        case Analytics::Case1: return "case1";
        case Analytics::Case2: return "case2";
        case Analytics::Generic: return "generic";
    }
    return "?";
}

inline Analytics parse_analytics(std::string_view s) {
    if (s == "case1") return Analytics::Case1;
    if (s == "case2") return Analytics::Case2;
    if (s == "generic") return Analytics::Generic;
    throw ValidationError("unknown analytics '" + std::string(s) + "' (case1|case2|generic)");
}

/// Path generator for case II scenarios.
enum class Case2Paths { Primal, Exact, Linearized };

inline std::string_view to_string(Case2Paths p) {
    switch (p) {
        case Case2Paths::Primal: return "primal";
        case Case2Paths::Exact: return "exact";
        case Case2Paths::Linearized: return "linearized";
    }
    return "?";
}

inline Case2Paths parse_case2_paths(std::string_view s) {
    if (s == "primal") return Case2Paths::Primal;
    if (s == "exact") return Case2Paths::Exact;
    if (s == "linearized") return Case2Paths::Linearized;
    throw ValidationError("unknown case2 path method '" + std::string(s) + "' (primal|exact|linearized)");
}

/// Everything needed to reproduce a run.
struct Scenario {
    std::string name = "custom";
    std::string notes;
    Analytics analytics = Analytics::Generic;
    ModelSpec spec;
    double A = 0.02;
    double B = 0.0;
    double horizon = 5.0;
    double dt = 1e-3;
    std::size_t n_paths = 25;
    std::uint64_t seed = 1;
    KernelMode kernel = KernelMode::Corrected;
    Case2Paths case2_paths = Case2Paths::Linearized;
    std::size_t output_points = 500;  ///< approximate number of output intervals
    std::size_t retain = 25;          ///< path columns written (capped by n_paths)
    std::vector<RationalExponent> sweep_m;
    std::vector<double> sweep_B;

    bool operator==(const Scenario&) const = default;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> out;
    s = trim(s);
    while (!s.empty()) {
        const auto comma = s.find(',');
        out.push_back(trim(s.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
    }
    return out;
}

inline std::uint64_t parse_unsigned(std::string_view s, std::string_view key) {
    s = trim(s);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ValidationError("'" + std::string(key) + "' expects a nonnegative integer, got '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace detail

/// Flat "key = value" text, one key per line, fixed order.
inline std::string serialize(const Scenario& sc) {
    using detail::format_double;
    std::ostringstream os;
    os << "name = " << sc.name << '\n';
    if (!sc.notes.empty()) os << "notes = " << sc.notes << '\n';
    os << "analytics = " << to_string(sc.analytics) << '\n';
    os << "a = " << sc.spec.a.to_string() << '\n';
    os << "b = " << sc.spec.b.to_string() << '\n';
    os << "c = " << sc.spec.c.to_string() << '\n';
    os << "sigma = " << sc.spec.sigma.to_string() << '\n';
    os << "m = " << sc.spec.m.to_string() << '\n';
    os << "n = " << sc.spec.n.to_string() << '\n';
    os << "k = " << sc.spec.k.to_string() << '\n';
    os << "l = " << sc.spec.l.to_string() << '\n';
    os << "power = " << to_string(sc.spec.power_mode) << '\n';
    os << "A = " << format_double(sc.A) << '\n';
    os << "B = " << format_double(sc.B) << '\n';
    os << "horizon = " << format_double(sc.horizon) << '\n';
    os << "dt = " << format_double(sc.dt) << '\n';
    os << "paths = " << sc.n_paths << '\n';
    os << "seed = " << sc.seed << '\n';
    os << "kernel = " << to_string(sc.kernel) << '\n';
    os << "case2_paths = " << to_string(sc.case2_paths) << '\n';
    os << "output_points = " << sc.output_points << '\n';
    os << "retain = " << sc.retain << '\n';
    if (!sc.sweep_m.empty()) {
        os << "sweep_m = ";
        for (std::size_t i = 0; i < sc.sweep_m.size(); ++i) os << (i ? ", " : "") << sc.sweep_m[i].to_string();
        os << '\n';
    }
    if (!sc.sweep_B.empty()) {
        os << "sweep_B = ";
        for (std::size_t i = 0; i < sc.sweep_B.size(); ++i) os << (i ? ", " : "") << format_double(sc.sweep_B[i]);
        os << '\n';
    }
    return os.str();
}

/// Inverse of serialize(). Missing keys keep their defaults; unknown or
/// repeated keys are errors. '#' starts a comment line.
inline Scenario parse_scenario(std::string_view text) {
    Scenario sc;
    std::map<std::string, bool> seen;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        line = detail::trim(line);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ValidationError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string_view value = detail::trim(line.substr(eq + 1));
        if (seen[key]) throw ValidationError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        seen[key] = true;
        try {
            if (key == "name") sc.name = std::string(value);
            else if (key == "notes") sc.notes = std::string(value);
            else if (key == "analytics") sc.analytics = parse_analytics(value);
            else if (key == "a") sc.spec.a = CoefficientFn::parse(value);
            else if (key == "b") sc.spec.b = CoefficientFn::parse(value);
            else if (key == "c") sc.spec.c = CoefficientFn::parse(value);
            else if (key == "sigma") sc.spec.sigma = CoefficientFn::parse(value);
            else if (key == "m") sc.spec.m = RationalExponent::parse(value);
            else if (key == "n") sc.spec.n = RationalExponent::parse(value);
            else if (key == "k") sc.spec.k = RationalExponent::parse(value);
            else if (key == "l") sc.spec.l = RationalExponent::parse(value);
            else if (key == "power") sc.spec.power_mode = parse_power_mode(value);
            else if (key == "A") sc.A = detail::parse_double(value);
            else if (key == "B") sc.B = detail::parse_double(value);
            else if (key == "horizon") sc.horizon = detail::parse_double(value);
            else if (key == "dt") sc.dt = detail::parse_double(value);
            else if (key == "paths") sc.n_paths = detail::parse_unsigned(value, key);
            else if (key == "seed") sc.seed = detail::parse_unsigned(value, key);
            else if (key == "kernel") sc.kernel = parse_kernel_mode(value);
            else if (key == "case2_paths") sc.case2_paths = parse_case2_paths(value);
            else if (key == "output_points") sc.output_points = detail::parse_unsigned(value, key);
            else if (key == "retain") sc.retain = detail::parse_unsigned(value, key);
            else if (key == "sweep_m") {
                for (auto item : detail::split_list(value)) sc.sweep_m.push_back(RationalExponent::parse(item));
            } else if (key == "sweep_B") {
                for (auto item : detail::split_list(value)) sc.sweep_B.push_back(detail::parse_double(item));
            } else {
                throw ValidationError("unknown key '" + key + "'");
            }
        } catch (const ValidationError& e) {
            throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return sc;
}

inline Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

namespace detail {

inline Scenario case1_preset(std::string name, std::string notes, CoefficientFn c, double sigma, int m, double A,
                             double B, PowerMode mode = PowerMode::OddRootReal) {
    Scenario sc;
    sc.name = std::move(name);
    sc.notes = std::move(notes);
    sc.analytics = Analytics::Case1;
    sc.spec.a = CoefficientFn::constant(0.0);
    sc.spec.b = CoefficientFn::constant(0.0);
    sc.spec.c = std::move(c);
    sc.spec.sigma = CoefficientFn::constant(sigma);
    sc.spec.m = RationalExponent{m};
    sc.spec.n = RationalExponent{1};
    sc.spec.k = RationalExponent{0};
    sc.spec.l = RationalExponent{1};
    sc.spec.power_mode = mode;
    sc.A = A;
    sc.B = B;
    return sc;
}

inline Scenario case2_preset(std::string name, std::string notes, CoefficientFn c, CoefficientFn a, CoefficientFn b,
                             double sigma, RationalExponent m, PowerMode mode = PowerMode::OddRootReal) {
    Scenario sc;
    sc.name = std::move(name);
    sc.notes = std::move(notes);
    sc.analytics = Analytics::Case2;
    sc.spec.a = std::move(a);
    sc.spec.b = std::move(b);
    sc.spec.c = std::move(c);
    sc.spec.sigma = CoefficientFn::constant(sigma);
    sc.spec.m = m;
    sc.spec.n = RationalExponent{0};
    sc.spec.k = RationalExponent{0};
    sc.spec.l = RationalExponent{2};
    sc.spec.power_mode = mode;
    sc.A = 0.02;
    sc.B = -0.025;
    sc.case2_paths = Case2Paths::Linearized;
    return sc;
}

}  // namespace detail

/// One preset per figure panel.
inline std::vector<Scenario> preset_scenarios() {
    using detail::case1_preset;
    using detail::case2_preset;
    const auto neg_exp = CoefficientFn::scaled_exp(-1.0, 1.0);
    const auto cos_t = CoefficientFn::scaled_cos(1.0, 1.0);
    const auto damped = CoefficientFn::damped_cos();
    const auto zero = CoefficientFn::constant(0.0);
    const auto minus_one = CoefficientFn::constant(-1.0);
    const auto one = CoefficientFn::constant(1.0);
    const auto signed_mode = PowerMode::SignedPower;

    std::vector<Scenario> out;
    out.push_back(case1_preset("fig1a", "c = cos t/(1+t)", damped, 0.05, 2, 0.02, 0.0));
    out.push_back(case1_preset("fig1b", "c = cos t", cos_t, 0.05, 2, 0.02, 0.0));
    out.push_back(case1_preset("fig2a", "c = -exp(-t), sigma = 0.05", neg_exp, 0.05, 2, 0.02, 0.0));
    out.push_back(case1_preset("fig2b", "c = -exp(-t), sigma = 0.1", neg_exp, 0.1, 2, 0.02, 0.0));
    out.push_back(case1_preset("fig3a", "m = 2", neg_exp, 0.2, 2, 0.03, 0.0));
    out.push_back(case1_preset("fig3b", "m = 4", neg_exp, 0.2, 4, 0.03, 0.0));
    out.push_back(case1_preset("fig3c", "m = 6", neg_exp, 0.2, 6, 0.03, 0.0));
    out.push_back(case1_preset("fig4a", "B = 0.03; B/c(0) < 0 has no real square root, signed power",
                               neg_exp, 0.05, 2, 0.02, 0.03, signed_mode));
    out.push_back(case1_preset("fig4b", "B = -0.03", neg_exp, 0.05, 2, 0.02, -0.03));
    out.push_back(case1_preset("fig4c", "B = 0", neg_exp, 0.05, 2, 0.02, 0.0));

    auto fig5a = case1_preset("fig5a", "mean sweep over B and m, c = cos t/(t+1)", damped, 0.05, 2, 0.02,
                              0.01);
    fig5a.sweep_m = {RationalExponent{2}, RationalExponent{6}};
    fig5a.sweep_B = {0.01, 0.03, 0.05, 0.07};
    out.push_back(fig5a);
    auto fig5b = case1_preset("fig5b",
                              "mean sweep over B and m, c = -exp(-t); paths use the signed power",
                              neg_exp, 0.05, 2, 0.02, 0.01, signed_mode);
    fig5b.sweep_m = fig5a.sweep_m;
    fig5b.sweep_B = fig5a.sweep_B;
    out.push_back(fig5b);

    out.push_back(case2_preset("fig6a", "c = -exp(-t), a = -1, sigma = 0.05", neg_exp, minus_one, zero,
                               0.05, RationalExponent{2}));
    out.push_back(case2_preset("fig6b", "c = -exp(-t), a = -1, sigma = 0.1", neg_exp, minus_one, zero,
                               0.1, RationalExponent{2}));
    out.push_back(case2_preset("fig7a", "c = -0.1, a = -1, sigma = 0.05",
                               CoefficientFn::constant(-0.1), minus_one, zero, 0.05, RationalExponent{2}));
    out.push_back(case2_preset("fig7b", "c = -0.1, a = -1, sigma = 0.1", CoefficientFn::constant(-0.1),
                               minus_one, zero, 0.1, RationalExponent{2}));
    out.push_back(case2_preset("fig8a", "m = 1, a = b = 1 (b is replaced by the path constraint)",
                               neg_exp, one, one, 0.01, RationalExponent{1}));
    out.push_back(case2_preset("fig8b", "m = 2, a = b = 1 (b is replaced by the path constraint)",
                               neg_exp, one, one, 0.01, RationalExponent{2}));
    out.push_back(case2_preset("fig8c", "m = 1/2 under the signed power, a = b = 1", neg_exp, one, one,
                               0.01, RationalExponent{1, 2}, signed_mode));
    return out;
}

inline Scenario find_preset(std::string_view name) {
    for (auto& sc : preset_scenarios()) {
        if (sc.name == name) return sc;
    }
    throw ValidationError("unknown scenario '" + std::string(name) + "' (see 'scenario list')");
}

}  // namespace negrate
