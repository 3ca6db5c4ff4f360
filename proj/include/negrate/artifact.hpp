#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "case1.hpp"
#include "case2.hpp"
#include "engine.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "model.hpp"
#include "scenario.hpp"

namespace negrate {

/// Command-line overrides applied on top of a scenario.
struct RunOverrides {
    std::optional<std::size_t> n_paths;
    std::optional<double> dt;
    std::optional<double> horizon;
    std::optional<std::uint64_t> seed;
    std::optional<KernelMode> kernel;
    std::optional<PowerMode> power;
    std::optional<std::size_t> retain;
};

inline Scenario apply_overrides(Scenario sc, const RunOverrides& o) {
    if (o.n_paths) sc.n_paths = *o.n_paths;
    if (o.dt) sc.dt = *o.dt;
    if (o.horizon) sc.horizon = *o.horizon;
    if (o.seed) sc.seed = *o.seed;
    if (o.kernel) sc.kernel = *o.kernel;
    if (o.power) sc.spec.power_mode = *o.power;
    if (o.retain) sc.retain = *o.retain;
    return sc;
}

struct RunArtifact {
    Scenario scenario;
    EnsembleStats stats;
    std::optional<std::vector<double>> mean_cf;
    std::optional<std::vector<double>> var_cf;
    std::vector<std::string> notices;
    WellPosedness well_posedness;
    std::vector<std::string> sweep_names;
    std::vector<std::vector<double>> sweep_columns;
};

namespace detail {

/// Output stride s dividing the step count, with steps / s the smallest
/// divisor of steps that is >= target (every node when target is 0).
inline std::size_t choose_stride(std::size_t steps, std::size_t target) {
    if (target == 0 || target >= steps) return 1;
    for (std::size_t k = target; k <= steps; ++k) {
        if (steps % k == 0) return steps / k;
    }
    return 1;
}

/// Converts per-path analytic failures into excluded paths.
template <class F>
std::vector<double> guarded(F&& f) {
    try {
        return f();
    } catch (const PathFailure&) {
        throw;
    } catch (const DomainError& e) {
        throw PathFailure(PathFailure::Kind::Domain, 0, e.what());
    } catch (const SingularDenominator& e) {
        throw PathFailure(PathFailure::Kind::BlowUp, 0, e.what());
    }
}

inline case2::Case2Config case2_config(const Scenario& sc) {
    auto sigma = sc.spec.sigma.constant_value();
    if (!sigma) throw ValidationError("case II scenarios need a constant sigma");
    case2::Case2Config cfg{sc.spec.a, *sigma, sc.spec.c, sc.spec.m, sc.A, sc.B, sc.spec.power_mode};
    cfg.validate();
    return cfg;
}

inline void run_case1_analytics(RunArtifact& art, const Grid& grid, std::size_t k) {
    const Scenario& sc = art.scenario;
    try {
        const auto cfg = case1::Case1Config::from_spec(sc.spec, sc.A, sc.B);
        const Grid agrid(grid.horizon(), k);
        const auto var = case1::case1_variance_curve(cfg, agrid, sc.kernel);
        std::vector<double> mean;
        for (double t : art.stats.times) mean.push_back(case1::case1_mean(cfg, t));
        art.mean_cf = std::move(mean);
        art.var_cf = var;
        if (sc.B != 0.0) art.notices.push_back("var_cf is the first-order (Taylor) approximation for B != 0");
    } catch (const ValidationError& e) {
        art.notices.push_back(std::string("closed-form columns skipped: ") + e.what());
    }
    if (sc.sweep_m.empty() || sc.sweep_B.empty()) return;
    for (const auto& m : sc.sweep_m) {
        for (double B : sc.sweep_B) {
            const std::string name = "mean_m" + m.to_string() + "_B" + format_double(B);
            try {
                if (!m.is_integer() || m.numerator() < 1) throw ValidationError("sweep m must be a positive integer");
                case1::Case1Config cfg{sc.spec.a, sc.spec.c, sc.spec.sigma, static_cast<unsigned>(m.numerator()),
                                       sc.A, B, PowerMode::OddRootReal};
                std::vector<double> col;
                for (double t : art.stats.times) col.push_back(case1::case1_mean(cfg, t));
                art.sweep_names.push_back(name);
                art.sweep_columns.push_back(std::move(col));
            } catch (const ValidationError& e) {
                art.notices.push_back("sweep column " + name + " skipped: " + e.what());
            }
        }
    }
}

}  // namespace detail

/// Runs the ensemble and whichever closed forms apply.
inline RunArtifact run_scenario(const Scenario& sc, unsigned threads = 1) {
    sc.spec.validate();
    if (sc.n_paths < 1) throw ValidationError("paths must be >= 1");
    const Grid grid = Grid::from_step(sc.horizon, sc.dt);
    const std::size_t stride = detail::choose_stride(grid.steps(), sc.output_points);
    const std::size_t k = grid.steps() / stride;
    EnsembleOptions opts;
    opts.threads = threads;
    opts.output_stride = stride;
    opts.retain = std::min(sc.retain, sc.n_paths);

    RunArtifact art;
    art.scenario = sc;
    if (sc.analytics == Analytics::Case2) {
        const auto cfg = detail::case2_config(sc);
        art.well_posedness = check_well_posedness(cfg.to_spec());
        std::optional<case2::LinearizedF> lin;
        if (sc.case2_paths == Case2Paths::Linearized) lin = case2::linearize_F(cfg, grid);
        PathSimulator sim = [&](const WienerPath& w) {
            return detail::guarded([&] {
                switch (sc.case2_paths) {
                    case Case2Paths::Primal: return case2::simulate_case2_primal(cfg, w).r;
                    case Case2Paths::Exact: return case2::case2_exact_path(cfg, w);
                    case Case2Paths::Linearized: break;
                }
                return case2::case2_linearized_path(cfg, *lin, w);
            });
        };
        art.stats = run_ensemble(sim, grid, sc.n_paths, sc.seed, opts);
        art.stats.well_posedness_warning = !art.well_posedness.guaranteed();
        if (cfg.m == RationalExponent{2}) {
            const auto curves = case2::case2_moment_curves(cfg, Grid(grid.horizon(), k), sc.kernel);
            art.mean_cf = curves.mean;
            art.var_cf = curves.variance;
            art.notices.push_back("mean_cf and var_cf are the linearised m = 2 approximations");
        } else {
            art.notices.push_back("closed-form columns skipped: case II moments are derived for m = 2 only");
        }
        return art;
    }

    const auto ic = derive_initial_conditions(sc.spec, sc.A, sc.B);
    art.well_posedness = check_well_posedness(sc.spec);
    art.stats = run_ensemble(sc.spec, ic, grid, sc.n_paths, sc.seed, opts);
    if (sc.analytics == Analytics::Case1) detail::run_case1_analytics(art, grid, k);
    return art;
}

/// t,mean_mc,var_mc,q05,q95[,mean_cf][,var_cf][,path_0,...]
inline std::string write_csv(const RunArtifact& art) {
    using detail::format_double;
    const auto& s = art.stats;
    std::string out = "t,mean_mc,var_mc,q05,q95";
    if (art.mean_cf) out += ",mean_cf";
    if (art.var_cf) out += ",var_cf";
    for (std::size_t j = 0; j < s.retained.size(); ++j) out += ",path_" + std::to_string(j);
    out += '\n';
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        out += format_double(s.times[i]);
        for (double v : {s.mean[i], s.variance[i], s.quantiles[0][i], s.quantiles[4][i]}) {
            out += ',';
            out += format_double(v);
        }
        if (art.mean_cf) out += "," + format_double((*art.mean_cf)[i]);
        if (art.var_cf) out += "," + format_double((*art.var_cf)[i]);
        for (const auto& path : s.retained) out += "," + format_double(path[i]);
        out += '\n';
    }
    return out;
}

/// t followed by one closed-form mean column per (m, B) pair.
inline std::string write_sweep_csv(const RunArtifact& art) {
    std::string out = "t";
    for (const auto& n : art.sweep_names) out += "," + n;
    out += '\n';
    for (std::size_t i = 0; i < art.stats.times.size(); ++i) {
        out += detail::format_double(art.stats.times[i]);
        for (const auto& col : art.sweep_columns) out += "," + detail::format_double(col[i]);
        out += '\n';
    }
    return out;
}

inline std::string write_summary(const RunArtifact& art) {
    using detail::format_double;
    const auto& s = art.stats;
    const auto& sc = art.scenario;
    std::ostringstream os;
    os << "scenario = " << sc.name << '\n';
    os << "master_seed = " << s.master_seed << '\n';
    os << "dt = " << format_double(sc.dt) << '\n';
    os << "horizon = " << format_double(sc.horizon) << '\n';
    os << "n_paths = " << s.n_paths << '\n';
    os << "power = " << to_string(sc.spec.power_mode) << '\n';
    os << "kernel = " << to_string(sc.kernel) << '\n';
    os << "well_posedness = " << (art.well_posedness.guaranteed() ? "guaranteed" : "unverified") << '\n';
    for (const auto& r : art.well_posedness.reasons) os << "well_posedness_reason = " << r.describe() << '\n';
    os << "survived = " << s.n_survived << '\n';
    os << "excluded = " << s.n_excluded() << '\n';
    os << "excluded_blow_up = " << s.n_blow_up << '\n';
    os << "excluded_domain = " << s.n_domain << '\n';
    os << "ever_negative_fraction = " << format_double(s.negative.ever_negative_fraction) << '\n';
    os << "mean_time_below_zero_fraction = " << format_double(s.negative.mean_time_below_zero_fraction) << '\n';
    static constexpr const char* qnames[] = {"q05", "q25", "q50", "q75", "q95"};
    for (std::size_t q = 0; q < s.negative.first_passage_quantiles.size(); ++q) {
        os << "first_passage_" << qnames[q] << " = " << format_double(s.negative.first_passage_quantiles[q]) << '\n';
    }
    for (const auto& n : art.notices) os << "notice = " << n << '\n';
    return os.str();
}

namespace detail {

inline std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

}  // namespace detail

/// 800x500 line chart: retained paths (red), MC mean (black, wide), the
/// closed-form mean (dashed blue path) and a zero line when anything dips
/// below 0.
inline std::string emit_plot(const RunArtifact& art) {
    using detail::fmt2;
    const auto& s = art.stats;
    if (s.times.empty() || s.mean.size() != s.times.size()) {
        throw ValidationError("cannot plot an empty artifact");
    }
    constexpr double W = 800, H = 500, left = 70, right = 20, top = 20, bottom = 50;
    double ymin = s.mean.front(), ymax = s.mean.front();
    auto extend = [&](const std::vector<double>& v) {
        for (double x : v) {
            if (!std::isfinite(x)) continue;
            ymin = std::min(ymin, x);
            ymax = std::max(ymax, x);
        }
    };
    extend(s.mean);
    for (const auto& p : s.retained) extend(p);
    if (art.mean_cf) extend(*art.mean_cf);
    const bool below_zero = ymin < 0.0;
    if (below_zero) ymax = std::max(ymax, 0.0);
    if (ymax - ymin <= 0.0) {
        const double pad = std::max(1e-12, std::fabs(ymax) * 0.05);
        ymin -= pad;
        ymax += pad;
    }
    const double t0 = s.times.front();
    const double t1 = s.times.back() > t0 ? s.times.back() : t0 + 1.0;
    auto X = [&](double t) { return left + (t - t0) / (t1 - t0) * (W - left - right); };
    auto Y = [&](double v) { return top + (ymax - v) / (ymax - ymin) * (H - top - bottom); };
    auto points = [&](const std::vector<double>& v) {
        std::string pts;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!std::isfinite(v[i])) continue;
            if (!pts.empty()) pts += ' ';
            pts += fmt2(X(s.times[i])) + "," + fmt2(Y(v[i]));
        }
        return pts;
    };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" viewBox=\"0 0 800 500\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"white\"/>\n";
    os << "<line x1=\"" << fmt2(left) << "\" y1=\"" << fmt2(H - bottom) << "\" x2=\"" << fmt2(W - right) << "\" y2=\""
       << fmt2(H - bottom) << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << fmt2(left) << "\" y1=\"" << fmt2(top) << "\" x2=\"" << fmt2(left) << "\" y2=\""
       << fmt2(H - bottom) << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double t = t0 + (t1 - t0) * i / 5.0;
        const double v = ymin + (ymax - ymin) * i / 5.0;
        os << "<text x=\"" << fmt2(X(t)) << "\" y=\"" << fmt2(H - bottom + 16) << "\" font-size=\"11\" "
           << "text-anchor=\"middle\">" << detail::tick_label(t) << "</text>\n";
        os << "<text x=\"" << fmt2(left - 6) << "\" y=\"" << fmt2(Y(v) + 4) << "\" font-size=\"11\" "
           << "text-anchor=\"end\">" << detail::tick_label(v) << "</text>\n";
    }
    os << "<text x=\"" << fmt2((left + W - right) / 2) << "\" y=\"" << fmt2(H - 10)
       << "\" font-size=\"14\" text-anchor=\"middle\">t</text>\n";
    os << "<text x=\"16\" y=\"" << fmt2((top + H - bottom) / 2) << "\" font-size=\"14\" text-anchor=\"middle\" "
       << "transform=\"rotate(-90 16 " << fmt2((top + H - bottom) / 2) << ")\">r_t</text>\n";
    if (below_zero) {
        os << "<line class=\"zero\" x1=\"" << fmt2(left) << "\" y1=\"" << fmt2(Y(0.0)) << "\" x2=\"" << fmt2(W - right)
           << "\" y2=\"" << fmt2(Y(0.0)) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
    }
    for (const auto& p : s.retained) {
        os << "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"0.8\" stroke-opacity=\"0.7\" points=\""
           << points(p) << "\"/>\n";
    }
    if (art.mean_cf) {
        std::string d;
        for (std::size_t i = 0; i < art.mean_cf->size(); ++i) {
            d += (i ? " L" : "M") + fmt2(X(s.times[i])) + "," + fmt2(Y((*art.mean_cf)[i]));
        }
        os << "<path fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\" d=\"" << d
           << "\"/>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"2\" points=\"" << points(s.mean) << "\"/>\n";
    os << "</svg>\n";
    return os.str();
}

/// Writes <name>.csv, <name>.cfg, <name>_summary.txt and optionally
/// <name>.svg and <name>_sweep.csv into `dir`; returns the paths written.
inline std::vector<std::filesystem::path> write_artifact(const RunArtifact& art, const std::filesystem::path& dir,
                                                         bool svg) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    auto put = [&](const std::string& file, const std::string& body) {
        const auto path = dir / file;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ValidationError("cannot write '" + path.string() + "'");
        out << body;
        written.push_back(path);
    };
    const std::string& name = art.scenario.name;
    put(name + ".csv", write_csv(art));
    put(name + ".cfg", serialize(art.scenario));
    put(name + "_summary.txt", write_summary(art));
    if (!art.sweep_columns.empty()) put(name + "_sweep.csv", write_sweep_csv(art));
    if (svg) put(name + ".svg", emit_plot(art));
    return written;
}

}  // namespace negrate
