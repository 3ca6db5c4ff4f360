#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "negrate/artifact.hpp"
#include "negrate/case1.hpp"
#include "negrate/scenario.hpp"

using namespace negrate;
namespace fs = std::filesystem;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

Scenario small(std::string name, double horizon = 2.0) {
    auto sc = find_preset(name);
    sc.horizon = horizon;
    sc.dt = 1e-2;
    sc.n_paths = 200;
    sc.output_points = 50;
    return sc;
}

fs::path scratch(const std::string& tag) {
    const auto dir = fs::temp_directory_path() / ("negrate_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args, const fs::path& dir, std::string* out = nullptr) {
    const auto log = dir / "stdout.txt";
    const std::string cmd =
        std::string("\"") + NEGRATE_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2> \"" +
        (dir / "stderr.txt").string() + "\"";
    const int status = std::system(cmd.c_str());
    if (out) {
        std::ifstream in(log);
        std::stringstream buf;
        buf << in.rdbuf();
        *out = buf.str();
    }
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST(Presets, CoverEveryPanel) {
    const auto all = preset_scenarios();
    EXPECT_GE(all.size(), 14u);
    const auto f1a = find_preset("fig1a");
    EXPECT_EQ(f1a.spec.c, CoefficientFn::damped_cos());
    EXPECT_EQ(f1a.spec.m, RationalExponent{2});
    EXPECT_EQ(f1a.A, 0.02);
    EXPECT_EQ(f1a.B, 0.0);
    EXPECT_EQ(f1a.spec.sigma, CoefficientFn::constant(0.05));
    const auto f3c = find_preset("fig3c");
    EXPECT_EQ(f3c.spec.m, RationalExponent{6});
    EXPECT_EQ(f3c.spec.sigma, CoefficientFn::constant(0.2));
    EXPECT_EQ(f3c.A, 0.03);
    const auto f8c = find_preset("fig8c");
    EXPECT_EQ(f8c.spec.m, (RationalExponent{1, 2}));
    EXPECT_EQ(f8c.spec.power_mode, PowerMode::SignedPower);
    EXPECT_EQ(f8c.analytics, Analytics::Case2);
    EXPECT_THROW(find_preset("fig9"), ValidationError);
}

TEST(ScenarioFile, RoundTripsEveryPreset) {
    for (const auto& sc : preset_scenarios()) {
        const auto text = serialize(sc);
        EXPECT_EQ(parse_scenario(text), sc) << sc.name;
        EXPECT_EQ(serialize(parse_scenario(text)), text);
    }
}

TEST(ScenarioFile, RejectsBadInput) {
    EXPECT_THROW(parse_scenario("name = x\ncolour = red\n"), ValidationError);
    EXPECT_THROW(parse_scenario("name = x\nname = y\n"), ValidationError);
    EXPECT_THROW(parse_scenario("m = 1/0\n"), ValidationError);
    EXPECT_THROW(parse_scenario("c = sin(t)\n"), ValidationError);
    EXPECT_THROW(load_scenario_file("/nonexistent/negrate.cfg"), ValidationError);
    const auto sc = parse_scenario("# comment\nname = tiny\nm = 3\n\nsigma = const(0.2)\n");
    EXPECT_EQ(sc.name, "tiny");
    EXPECT_EQ(sc.spec.m, RationalExponent{3});
}

TEST(Csv, HeaderAndFormat) {
    const auto art = run_scenario(small("fig2a"));
    const auto csv = write_csv(art);
    std::string expected = "t,mean_mc,var_mc,q05,q95,mean_cf,var_cf";
    for (int i = 0; i < 25; ++i) expected += ",path_" + std::to_string(i);
    EXPECT_EQ(first_line(csv), expected);
    EXPECT_EQ(count(csv, "\n"), 51u + 1u);
    EXPECT_EQ(csv.substr(csv.find('\n') + 1, 7), "0,0.02,");
    EXPECT_EQ(detail::format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(detail::format_double(0.0), "0");
}

TEST(Csv, AbsentAnalyticsColumnsAreOmitted) {
    auto sc = small("fig2a");
    sc.analytics = Analytics::Generic;
    sc.retain = 1;
    EXPECT_EQ(first_line(write_csv(run_scenario(sc))), "t,mean_mc,var_mc,q05,q95,path_0");
}

TEST(Csv, ClosedFormColumnIsCaseOneMean) {
    const auto sc = small("fig1b", 5.0);
    const auto art = run_scenario(sc);
    ASSERT_TRUE(art.mean_cf);
    const auto cfg = case1::Case1Config::from_spec(sc.spec, sc.A, sc.B);
    for (std::size_t i = 0; i < art.stats.times.size(); ++i) {
        EXPECT_EQ((*art.mean_cf)[i], case1::case1_mean(cfg, art.stats.times[i]));
    }
}

TEST(Csv, SameSeedSameBytes) {
    const auto sc = small("fig6a");
    const auto one = write_csv(run_scenario(sc, 1));
    EXPECT_EQ(one, write_csv(run_scenario(sc, 1)));
    EXPECT_EQ(one, write_csv(run_scenario(sc, 3)));
    auto other = sc;
    other.seed = 2;
    EXPECT_NE(one, write_csv(run_scenario(other, 1)));
}

TEST(Plot, PolylineCountAndAxes) {
    const auto svg = emit_plot(run_scenario(small("fig2a")));
    EXPECT_EQ(count(svg, "<polyline"), 26u);
    EXPECT_NE(svg.find("width=\"800\" height=\"500\""), std::string::npos);
    EXPECT_NE(svg.find(">t</text>"), std::string::npos);
    EXPECT_NE(svg.find(">r_t</text>"), std::string::npos);
    EXPECT_EQ(svg.find("href"), std::string::npos);
}

TEST(Plot, ZeroLineOnlyWhenNegative) {
    RunArtifact art;
    art.stats.times = {0.0, 1.0, 2.0};
    art.stats.mean = {0.02, 0.01, 0.005};
    EXPECT_EQ(count(emit_plot(art), "class=\"zero\""), 0u);
    art.stats.mean = {0.02, 0.0, -0.01};
    EXPECT_EQ(count(emit_plot(art), "class=\"zero\""), 1u);
}

TEST(Plot, MeanOnlyAndEmpty) {
    RunArtifact art;
    art.stats.times = {0.0, 1.0};
    art.stats.mean = {0.02, 0.03};
    EXPECT_EQ(count(emit_plot(art), "<polyline"), 1u);
    EXPECT_THROW(emit_plot(RunArtifact{}), ValidationError);
}

TEST(Run, RejectsBadSteps) {
    auto sc = small("fig2a");
    sc.dt = 0.0;
    EXPECT_THROW(run_scenario(sc), ValidationError);
    sc.dt = 0.3;
    EXPECT_THROW(run_scenario(sc), ValidationError);
    sc = small("fig2a");
    sc.n_paths = 0;
    EXPECT_THROW(run_scenario(sc), ValidationError);
}

TEST(Run, SweepColumns) {
    const auto art = run_scenario(small("fig5a"));
    EXPECT_EQ(art.sweep_columns.size(), 8u);
    EXPECT_EQ(first_line(write_sweep_csv(art)).substr(0, 2), "t,");
}

TEST(Run, WritesArtifacts) {
    const auto dir = scratch("write");
    const auto files = write_artifact(run_scenario(small("fig2a")), dir, true);
    EXPECT_EQ(files.size(), 4u);
    for (const char* f : {"fig2a.csv", "fig2a.cfg", "fig2a_summary.txt", "fig2a.svg"}) {
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    }
    EXPECT_EQ(parse_scenario(slurp(dir / "fig2a.cfg")), small("fig2a"));
    fs::remove_all(dir);
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch("codes");
    std::string out;
    EXPECT_EQ(run_cli("scenario list", dir, &out), 0);
    EXPECT_NE(out.find("fig8c"), std::string::npos);
    EXPECT_EQ(run_cli("moments wiener --k 4 --t 2", dir, &out), 0);
    EXPECT_EQ(out, "12\n");
    EXPECT_EQ(run_cli("moments gauss --s1 1 --s2 1 --rho 0.5 --kernel paper", dir, &out), 0);
    EXPECT_EQ(out, "1\n");
    EXPECT_EQ(run_cli("case1 mean fig1b --t 5", dir, &out), 0);
    EXPECT_NEAR(std::stod(out), 0.00622, 1e-5);
    EXPECT_EQ(run_cli("scenario run fig9", dir), 2);
    EXPECT_EQ(run_cli("scenario run fig2a --dt 0", dir), 2);
    EXPECT_EQ(run_cli("scenario run fig2a --kernel nope", dir), 2);
    EXPECT_EQ(run_cli("moments nope", dir), 2);
    EXPECT_EQ(run_cli("case1 mean fig6a --t 1", dir), 2);

    std::ofstream(dir / "blowup.cfg") << "name = blowup\nanalytics = generic\na = const(5)\nl = 3\nm = 1\n"
                                         "sigma = const(0.1)\nB = 1\npaths = 5\n";
    EXPECT_EQ(run_cli("scenario run --config \"" + (dir / "blowup.cfg").string() + "\" --out \"" +
                          (dir / "o").string() + "\"",
                      dir),
              3);
    fs::remove_all(dir);
}

TEST(Cli, RunWritesPlot) {
    const auto dir = scratch("plot");
    EXPECT_EQ(run_cli("scenario run fig2a --paths 25 --dt 0.01 --horizon 2 --out \"" + (dir / "o").string() +
                          "\" --svg",
                      dir),
              0);
    EXPECT_EQ(count(slurp(dir / "o" / "fig2a.svg"), "<polyline"), 26u);
    const auto csv = slurp(dir / "o" / "fig2a.csv");
    EXPECT_EQ(run_cli("scenario run fig2a --paths 25 --dt 0.01 --horizon 2 --threads 2 --out \"" +
                          (dir / "p").string() + "\"",
                      dir),
              0);
    EXPECT_EQ(slurp(dir / "p" / "fig2a.csv"), csv);
    fs::remove_all(dir);
}
