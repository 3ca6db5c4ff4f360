#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "negrate/numerics.hpp"

using namespace negrate;
using namespace negrate::numerics;

namespace {

std::vector<double> sample(std::size_t n, double T, double (*f)(double)) {
    std::vector<double> v(n + 1);
    for (std::size_t i = 0; i <= n; ++i) v[i] = f(T * static_cast<double>(i) / static_cast<double>(n));
    return v;
}

template <class K>
double tensor(std::size_t n, double T, K k) {
    const double h = T / static_cast<double>(n);
    std::vector<double> flat((n + 1) * (n + 1));
    for (std::size_t i = 0; i <= n; ++i)
        for (std::size_t j = 0; j <= n; ++j) flat[i * (n + 1) + j] = k(i * h, j * h);
    return double_trapz(flat, n + 1, h);
}

}  // namespace

TEST(QuadGrid, WeightsSumToLength) {
    const auto g = QuadGrid::uniform(0.0, 2.5, 37);
    double s = 0.0;
    for (double w : g.weights) {
        EXPECT_GT(w, 0.0);
        s += w;
    }
    EXPECT_NEAR(s, 2.5, 1e-14);
}

TEST(Cumtrapz, ConstantAndLinearAreExact) {
    const auto one = cumtrapz(sample(100, 1.0, [](double) { return 1.0; }), 0.01);
    EXPECT_EQ(one.front(), 0.0);
    EXPECT_NEAR(one.back(), 1.0, 1e-15);
    const auto lin = cumtrapz(sample(100, 1.0, [](double u) { return u; }), 0.01);
    EXPECT_NEAR(lin.back(), 0.5, 1e-16);
    EXPECT_NEAR(lin[50], 0.125, 1e-16);
    EXPECT_THROW(cumtrapz(std::vector<double>{1.0}, 0.1), ValidationError);
}

TEST(Cumtrapz, SecondOrder) {
    auto err = [](std::size_t n) {
        return std::fabs(cumtrapz(sample(n, 1.0, [](double u) { return u * u; }), 1.0 / n).back() - 1.0 / 3.0);
    };
    EXPECT_NEAR(err(50) / err(100), 4.0, 0.05);
}

TEST(Cumtrapz, NonuniformTimes) {
    const std::vector<double> ts{0.0, 0.1, 0.4, 1.0};
    const std::vector<double> vs{0.0, 0.1, 0.4, 1.0};
    EXPECT_NEAR(cumtrapz(vs, ts).back(), 0.5, 1e-16);
}

TEST(DoubleTrapz, Examples) {
    EXPECT_NEAR(tensor(40, 1.0, [](double, double) { return 1.0; }), 1.0, 1e-14);
    EXPECT_NEAR(tensor(40, 1.0, [](double s, double u) { return s * u; }), 0.25, 1e-14);
    EXPECT_NEAR(tensor(200, 1.0, [](double s, double u) { return std::min(s, u); }), 1.0 / 3.0, 1e-4);
    EXPECT_THROW(double_trapz(std::vector<std::vector<double>>{{1.0, 2.0}, {3.0}}, 0.1), ValidationError);
}

TEST(DoubleTrapz, ConvergenceOrder) {
    auto smooth = [](double s, double u) { return std::exp(s) * std::cos(u); };
    const double exact = (std::exp(1.0) - 1.0) * std::sin(1.0);
    const double e1 = std::fabs(tensor(20, 1.0, smooth) - exact);
    const double e2 = std::fabs(tensor(40, 1.0, smooth) - exact);
    EXPECT_GE(e1 / e2, 3.5);
    auto kink = [](double s, double u) { return std::min(s, u); };
    const double k1 = std::fabs(tensor(21, 1.0, kink) - 1.0 / 3.0);
    const double k2 = std::fabs(tensor(42, 1.0, kink) - 1.0 / 3.0);
    EXPECT_GE(k1 / k2, 1.9);
}

TEST(DoubleTrapz, Linear) {
    auto f = [](double s, double u) { return s * s + u; };
    auto g = [](double s, double u) { return std::sin(s * u); };
    const double lhs = tensor(30, 2.0, [&](double s, double u) { return 2.0 * f(s, u) - 3.0 * g(s, u); });
    const double rhs = 2.0 * tensor(30, 2.0, f) - 3.0 * tensor(30, 2.0, g);
    EXPECT_NEAR(lhs, rhs, 1e-12);
}

TEST(CumulativeDoubleTrapz, MatchesDirectTensorOnEveryPrefix) {
    const std::size_t n = 60;
    const double h = 0.05;
    auto k = [&](std::size_t i, std::size_t j) {
        const double s = i * h, u = j * h;
        return std::min(s, u) + s * u + std::cos(s - u);
    };
    const auto cum = cumulative_double_trapz(n, h, k);
    EXPECT_EQ(cum[0], 0.0);
    for (std::size_t m : {1u, 2u, 7u, 30u, 59u}) {
        std::vector<double> flat((m + 1) * (m + 1));
        for (std::size_t i = 0; i <= m; ++i)
            for (std::size_t j = 0; j <= m; ++j) flat[i * (m + 1) + j] = i >= j ? k(i, j) : k(j, i);
        EXPECT_NEAR(cum[m], double_trapz(flat, m + 1, h), 1e-12 * (1.0 + std::fabs(cum[m])));
    }
}

TEST(Hypergeometric, Terminating) {
    EXPECT_DOUBLE_EQ(hypergeom_3f1_terminating(1.0, 0.0, 0.5, 2.0, 3.7), 1.0);
    EXPECT_DOUBLE_EQ(hypergeom_3f1_terminating(1.0, -1.0, -0.5, 2.0, 0.0), 1.0);
    for (double x : {-2.0, 0.3, 5.0}) {
        EXPECT_NEAR(hypergeom_3f1_terminating(1.0, -1.0, -0.5, 2.0, x), 1.0 + x / 4.0, 1e-15 * (1 + std::fabs(x)));
    }
    // (1)_j(-2)_j(-3/2)_j / ((2)_j j!) x^j: 1 + 3x/2 + x^2/4
    EXPECT_NEAR(hypergeom_3f1_terminating(1.0, -2.0, -1.5, 2.0, 2.0), 1.0 + 3.0 + 1.0, 1e-13);
    EXPECT_THROW(hypergeom_3f1_terminating(1.0, 0.5, 0.25, 2.0, 1.0), ValidationError);
}

TEST(Hypergeometric, LargeDegreeStaysFinite) {
    const double v = hypergeom_3f1_terminating(1.0, -25.0, -24.5, 2.0, 1e-3);
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GT(v, 1.0);
}

TEST(GaussHermite, OneDimensionalMoments) {
    for (unsigned k = 0; k <= 10; ++k) {
        double expected = 0.0;
        if (k % 2 == 0) {
            expected = 1.0;
            for (unsigned i = k; i > 1; i -= 2) expected *= (i - 1);
            expected *= std::pow(1.3, k);
        }
        EXPECT_NEAR(gauss_hermite_moment(k, 1.3), expected, 1e-12 * (1.0 + expected));
        EXPECT_NEAR(gauss_hermite_2d_moment(k, 0, 1.3, 0.7, 0.4), expected, 1e-12 * (1.0 + expected));
    }
}

TEST(GaussHermite, BivariateExamples) {
    EXPECT_NEAR(gauss_hermite_2d_moment(1, 1, 1, 1, 0.5), 0.5, 1e-13);
    EXPECT_NEAR(gauss_hermite_2d_moment(2, 0, 3, 1, 0.2), 9.0, 1e-12);
    EXPECT_NEAR(gauss_hermite_2d_moment(2, 2, 1, 1, 0.5), 1.5, 1e-13);
    EXPECT_NEAR(gauss_hermite_2d_moment(1, 1, 2, 3, 1.0), 6.0, 1e-12);
    EXPECT_THROW(gauss_hermite_2d_moment(1, 1, 1, 1, 0.5, 32), ValidationError);
}
