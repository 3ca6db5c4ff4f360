// negrate command-line front end.
//
//   negrate scenario list
//   negrate scenario run <name|--config FILE> [overrides] [--out DIR] [--svg]
//   negrate moments wiener|product|gauss ...
//   negrate case1 mean|var <name|--config FILE> --t T
//   negrate case2 exact|linearized|moments <name|--config FILE> ...
//
// Exit status: 0 ok, 2 validation error, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "negrate/negrate.hpp"

namespace {

using negrate::detail::format_double;

struct Source {
    std::string name;
    std::string config;

    negrate::Scenario resolve() const {
        if (!config.empty() && !name.empty()) {
            throw negrate::ValidationError("give either a scenario name or --config, not both");
        }
        if (!config.empty()) return negrate::load_scenario_file(config);
        if (name.empty()) throw negrate::ValidationError("a scenario name or --config FILE is required");
        return negrate::find_preset(name);
    }
};

void add_source(CLI::App* cmd, Source& src) {
    cmd->add_option("name", src.name, "Preset scenario name");
    cmd->add_option("--config", src.config, "Scenario file (key = value lines)");
}

struct RunArgs {
    Source src;
    std::optional<std::size_t> paths;
    std::optional<double> dt;
    std::optional<double> horizon;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> kernel;
    std::optional<std::string> power;
    std::optional<std::size_t> retain;
    unsigned threads = 1;
    std::string out = "out";
    bool svg = false;
};

int run_scenario_cmd(const RunArgs& a) {
    negrate::RunOverrides o;
    o.n_paths = a.paths;
    o.dt = a.dt;
    o.horizon = a.horizon;
    o.seed = a.seed;
    o.retain = a.retain;
    if (a.kernel) o.kernel = negrate::parse_kernel_mode(*a.kernel);
    if (a.power) o.power = negrate::parse_power_mode(*a.power);
    const auto sc = negrate::apply_overrides(a.src.resolve(), o);
    const auto art = negrate::run_scenario(sc, a.threads);
    const auto files = negrate::write_artifact(art, a.out, a.svg);
    std::cout << negrate::write_summary(art);
    for (const auto& f : files) std::cout << "wrote " << f.string() << '\n';
    return 0;
}

void print_path_csv(const negrate::WienerPath& w, const std::vector<double>& r) {
    std::cout << "t,w,r\n";
    for (std::size_t i = 0; i < r.size(); ++i) {
        std::cout << format_double(w.times[i]) << ',' << format_double(w.values[i]) << ',' << format_double(r[i])
                  << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Second-order short-rate model: simulation, closed forms and figure scenarios"};
    app.require_subcommand(1);

    // scenario
    auto* scenario = app.add_subcommand("scenario", "Preset figure scenarios");
    scenario->require_subcommand(1);
    auto* list = scenario->add_subcommand("list", "List presets");
    RunArgs run_args;
    auto* run = scenario->add_subcommand("run", "Run a scenario and write CSV/SVG artifacts");
    add_source(run, run_args.src);
    run->add_option("--paths", run_args.paths, "Number of Monte Carlo paths");
    run->add_option("--dt", run_args.dt, "Time step");
    run->add_option("--horizon", run_args.horizon, "Final time T");
    run->add_option("--seed", run_args.seed, "Master seed");
    run->add_option("--kernel", run_args.kernel, "corrected|paper");
    run->add_option("--power", run_args.power, "oddroot|signed");
    run->add_option("--retain", run_args.retain, "Path columns to write");
    run->add_option("--threads", run_args.threads, "Worker threads (0 = all cores)");
    run->add_option("--out", run_args.out, "Output directory");
    run->add_flag("--svg", run_args.svg, "Also write an SVG plot");

    // moments
    auto* moments = app.add_subcommand("moments", "Gaussian moment calculators");
    moments->require_subcommand(1);
    unsigned k = 2, m = 2, s1 = 1, s2 = 1;
    double t = 1.0, s = 1.0, u = 1.0, sd1 = 1.0, sd2 = 1.0, rho = 0.0;
    std::string kernel = "corrected";
    auto* mw = moments->add_subcommand("wiener", "E[W_t^k]");
    mw->add_option("--k", k)->required();
    mw->add_option("--t", t)->required();
    auto* mp = moments->add_subcommand("product", "E[W_s^m W_u^m]");
    mp->add_option("--m", m)->required();
    mp->add_option("--s", s)->required();
    mp->add_option("--u", u)->required();
    auto* mg = moments->add_subcommand("gauss", "E[Z1^s1 Z2^s2] for a bivariate normal");
    mg->add_option("--s1", s1)->required();
    mg->add_option("--s2", s2)->required();
    mg->add_option("--sd1", sd1);
    mg->add_option("--sd2", sd2);
    mg->add_option("--rho", rho)->required();
    mg->add_option("--kernel", kernel, "corrected|paper");

    // case1
    auto* case1 = app.add_subcommand("case1", "Case I closed forms (k = 0, l = 1, b = 0)");
    case1->require_subcommand(1);
    Source c1_src;
    double c1_t = 1.0;
    std::size_t nodes = 2000;
    std::string c1_kernel = "corrected";
    auto* c1_mean = case1->add_subcommand("mean", "E[R_t]");
    auto* c1_var = case1->add_subcommand("var", "Var[R_t]");
    for (auto* cmd : {c1_mean, c1_var}) {
        add_source(cmd, c1_src);
        cmd->add_option("--t", c1_t)->required();
    }
    c1_var->add_option("--kernel", c1_kernel, "corrected|paper");
    c1_var->add_option("--nodes", nodes, "Quadrature intervals");

    // case2
    auto* case2 = app.add_subcommand("case2", "Case II paths and m = 2 moments");
    case2->require_subcommand(1);
    Source c2_src;
    double c2_dt = 1e-3;
    std::optional<double> c2_horizon;
    std::uint64_t c2_seed = 1;
    double c2_t = 1.0;
    std::string c2_kernel = "corrected";
    auto* c2_exact = case2->add_subcommand("exact", "Exact nested-quadrature path on one Wiener path");
    auto* c2_lin = case2->add_subcommand("linearized", "Linearised path on one Wiener path");
    for (auto* cmd : {c2_exact, c2_lin}) {
        add_source(cmd, c2_src);
        cmd->add_option("--dt", c2_dt);
        cmd->add_option("--horizon", c2_horizon);
        cmd->add_option("--seed", c2_seed);
    }
    auto* c2_mom = case2->add_subcommand("moments", "Approximate mean and variance (m = 2)");
    add_source(c2_mom, c2_src);
    c2_mom->add_option("--t", c2_t)->required();
    c2_mom->add_option("--kernel", c2_kernel, "corrected|paper");
    c2_mom->add_option("--nodes", nodes, "Quadrature intervals");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (list->parsed()) {
            for (const auto& sc : negrate::preset_scenarios()) {
                std::printf("%-6s %-8s %s\n", sc.name.c_str(), std::string(to_string(sc.analytics)).c_str(),
                            sc.notes.c_str());
            }
            return 0;
        }
        if (run->parsed()) return run_scenario_cmd(run_args);
        if (mw->parsed()) {
            std::cout << format_double(negrate::wiener_moment(k, t)) << '\n';
            return 0;
        }
        if (mp->parsed()) {
            std::cout << format_double(negrate::wiener_product_moment(m, s, u)) << '\n';
            return 0;
        }
        if (mg->parsed()) {
            std::cout << format_double(negrate::gaussian_product_moment(s1, s2, sd1, sd2, rho,
                                                                        negrate::parse_kernel_mode(kernel)))
                      << '\n';
            return 0;
        }
        if (c1_mean->parsed() || c1_var->parsed()) {
            const auto sc = c1_src.resolve();
            const auto cfg = negrate::case1::Case1Config::from_spec(sc.spec, sc.A, sc.B);
            const double v = c1_mean->parsed()
                                 ? negrate::case1::case1_mean(cfg, c1_t)
                                 : negrate::case1::case1_variance(cfg, c1_t, negrate::parse_kernel_mode(c1_kernel),
                                                                  nodes);
            std::cout << format_double(v) << '\n';
            return 0;
        }
        if (c2_exact->parsed() || c2_lin->parsed()) {
            auto sc = c2_src.resolve();
            const auto cfg = negrate::detail::case2_config(sc);
            const auto grid = negrate::Grid::from_step(c2_horizon.value_or(sc.horizon), c2_dt);
            const auto w = negrate::generate_wiener(grid, negrate::path_seed(c2_seed, 0));
            const auto r = c2_exact->parsed()
                               ? negrate::case2::case2_exact_path(cfg, w)
                               : negrate::case2::case2_linearized_path(cfg, negrate::case2::linearize_F(cfg, grid), w);
            print_path_csv(w, r);
            return 0;
        }
        if (c2_mom->parsed()) {
            const auto sc = c2_src.resolve();
            const auto cfg = negrate::detail::case2_config(sc);
            const auto mom = negrate::case2::case2_approx_moments_m2(cfg, c2_t, negrate::parse_kernel_mode(c2_kernel),
                                                                     nodes);
            std::cout << "mean = " << format_double(mom.mean) << "\nvariance = " << format_double(mom.variance)
                      << '\n';
            return 0;
        }
    } catch (const negrate::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const negrate::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
