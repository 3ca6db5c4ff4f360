#include <gtest/gtest.h>

#include <cmath>

#include "negrate/coefficient.hpp"
#include "negrate/grid.hpp"
#include "negrate/model.hpp"
#include "negrate/power.hpp"

using namespace negrate;

TEST(RationalExponent, ReducesAndKeepsPositiveDenominator) {
    const RationalExponent e{6, -9};
    EXPECT_EQ(e.numerator(), -2);
    EXPECT_EQ(e.denominator(), 3);
    EXPECT_EQ(RationalExponent::parse("4/6"), (RationalExponent{2, 3}));
    EXPECT_EQ(RationalExponent::parse("-3"), RationalExponent{-3});
    EXPECT_EQ((RationalExponent{1, 3} + RationalExponent{1, 6}).to_string(), "1/2");
    EXPECT_TRUE((RationalExponent{1, 2}).requires_even_root());
    EXPECT_THROW(RationalExponent(1, 0), ValidationError);
    EXPECT_THROW(RationalExponent::parse("1/x"), ValidationError);
}

TEST(Power, OddRootReal) {
    EXPECT_DOUBLE_EQ(power(-8.0, {1, 3}, PowerMode::OddRootReal), -2.0);
    EXPECT_DOUBLE_EQ(power(-8.0, {2, 3}, PowerMode::OddRootReal), 4.0);
    EXPECT_DOUBLE_EQ(power(-2.0, RationalExponent{2}, PowerMode::OddRootReal), 4.0);
    EXPECT_DOUBLE_EQ(power(-2.0, RationalExponent{3}, PowerMode::OddRootReal), -8.0);
    EXPECT_THROW(power(-4.0, {1, 2}, PowerMode::OddRootReal), DomainError);
    EXPECT_DOUBLE_EQ(power(4.0, {1, 2}, PowerMode::OddRootReal), 2.0);
}

TEST(Power, SignedPower) {
    EXPECT_DOUBLE_EQ(power(-2.0, RationalExponent{2}, PowerMode::SignedPower), -4.0);
    EXPECT_DOUBLE_EQ(power(2.0, RationalExponent{2}, PowerMode::SignedPower), 4.0);
    EXPECT_DOUBLE_EQ(power(-4.0, {1, 2}, PowerMode::SignedPower), -2.0);
}

TEST(Power, ZeroBase) {
    for (auto mode : {PowerMode::OddRootReal, PowerMode::SignedPower}) {
        EXPECT_EQ(power(0.0, {3, 5}, mode), 0.0);
        EXPECT_EQ(power(0.0, RationalExponent{0}, mode), 1.0);
        EXPECT_THROW(power(0.0, RationalExponent{-1}, mode), DomainError);
    }
}

TEST(Power, OddRootMatchesSignRule) {
    for (double z : {-3.7, -0.2, 0.5, 9.1}) {
        for (auto e : {RationalExponent{1, 3}, RationalExponent{2, 5}, RationalExponent{-4, 3}, RationalExponent{7, 1}}) {
            const double expected = std::pow(z < 0 ? -1.0 : 1.0, static_cast<double>(e.numerator())) *
                                    std::pow(std::fabs(z), e.value());
            EXPECT_NEAR(power(z, e, PowerMode::OddRootReal), expected, 1e-13 * std::fabs(expected));
        }
    }
}

TEST(Power, ParseMode) {
    EXPECT_EQ(parse_power_mode("signed"), PowerMode::SignedPower);
    EXPECT_EQ(parse_power_mode("oddroot"), PowerMode::OddRootReal);
    EXPECT_THROW(parse_power_mode("complex"), ValidationError);
}

TEST(Coefficient, EvaluatesPresets) {
    EXPECT_DOUBLE_EQ(CoefficientFn::constant(0.3)(7.0), 0.3);
    EXPECT_DOUBLE_EQ(CoefficientFn::scaled_exp(-1.0, 1.0)(2.0), -std::exp(-2.0));
    EXPECT_DOUBLE_EQ(CoefficientFn::scaled_cos(2.0, 3.0)(0.5), 2.0 * std::cos(1.5));
    EXPECT_DOUBLE_EQ(CoefficientFn::damped_cos()(1.0), std::cos(1.0) / 2.0);
}

TEST(Coefficient, AnalyticDerivatives) {
    const double t = 0.7, h = 1e-6;
    for (const auto& f : {CoefficientFn::scaled_exp(-1.0, 1.0), CoefficientFn::scaled_cos(2.0, 3.0),
                          CoefficientFn::damped_cos(), CoefficientFn::constant(4.0)}) {
        const double fd = (f(t + h) - f(t - h)) / (2 * h);
        EXPECT_NEAR(f.derivative(t), fd, 1e-8) << f.to_string();
    }
}

TEST(Coefficient, TabulatedInterpolatesAndRejectsOutside) {
    const auto f = CoefficientFn::tabulated({0.0, 1.0, 3.0}, {1.0, 3.0, 2.0});
    EXPECT_DOUBLE_EQ(f(0.5), 2.0);
    EXPECT_DOUBLE_EQ(f(2.0), 2.5);
    EXPECT_DOUBLE_EQ(f(3.0), 2.0);
    EXPECT_THROW(f(3.5), ValidationError);
    EXPECT_THROW(f(-0.1), ValidationError);
    EXPECT_THROW(CoefficientFn::tabulated({0.0, 0.0}, {1.0, 2.0}), ValidationError);
    // central difference with the local spacing, clamped at the left end
    EXPECT_NEAR(f.derivative(0.5), (f(1.5) - f(0.0)) / 1.5, 1e-12);
    EXPECT_NEAR(f.derivative(2.0), (f(3.0) - f(0.0)) / 3.0, 1e-12);
}

TEST(Coefficient, ParseRoundTrip) {
    for (const auto& f :
         {CoefficientFn::constant(-0.1), CoefficientFn::scaled_exp(-1.0, 1.0), CoefficientFn::scaled_cos(1.0, 1.0),
          CoefficientFn::damped_cos(), CoefficientFn::tabulated({0.0, 0.5, 2.0}, {0.1, 0.30000000000000004, -1e-9})}) {
        EXPECT_EQ(CoefficientFn::parse(f.to_string()), f) << f.to_string();
    }
    EXPECT_EQ(CoefficientFn::parse("  scaled_exp( -1 , 1 ) "), CoefficientFn::scaled_exp(-1.0, 1.0));
    EXPECT_THROW(CoefficientFn::parse("sin(1)"), ValidationError);
    EXPECT_THROW(CoefficientFn::parse("const(1, 2)"), ValidationError);
}

TEST(InitialConditions, ZeroSlope) {
    ModelSpec spec;
    spec.m = RationalExponent{2};
    spec.sigma = CoefficientFn::constant(0.05);
    const auto ic = derive_initial_conditions(spec, 0.02, 0.0);
    EXPECT_EQ(ic.p0, 0.0);
    EXPECT_EQ(ic.z0, 0.0);
}

TEST(InitialConditions, FigureSixParameters) {
    ModelSpec spec;
    spec.c = CoefficientFn::scaled_exp(-1.0, 1.0);
    spec.sigma = CoefficientFn::constant(0.05);
    spec.m = RationalExponent{2};
    const auto ic = derive_initial_conditions(spec, 0.02, -0.025);
    EXPECT_NEAR(ic.p0, std::sqrt(0.025), 1e-15);
    EXPECT_NEAR(ic.z0, std::sqrt(0.025) / 0.05, 1e-13);
    EXPECT_NEAR(spec.c(0.0) * power(ic.p0, spec.m, spec.power_mode), -0.025, 1e-12 * 0.025);

    spec.c = CoefficientFn::scaled_exp(1.0, 1.0);
    EXPECT_THROW(derive_initial_conditions(spec, 0.02, -0.025), DomainError);
}

TEST(InitialConditions, RoundTripsSlope) {
    for (int num : {1, 2, 3, 5}) {
        for (int den : {1, 3}) {
            ModelSpec spec;
            spec.c = CoefficientFn::constant(-0.7);
            spec.m = RationalExponent{num, den};
            for (double B : {-0.03, 0.01}) {
                if (B > 0.0 && num % 2 == 0) continue;  // no real even root of B / c(0) < 0
                const auto ic = derive_initial_conditions(spec, 0.02, B);
                EXPECT_NEAR(spec.c(0.0) * power(ic.p0, spec.m, spec.power_mode), B, 1e-12 * std::fabs(B));
            }
        }
    }
}

TEST(InitialConditions, RequiresPositiveLevelWhenKNonzero) {
    ModelSpec spec;
    spec.k = RationalExponent{1};
    EXPECT_THROW(derive_initial_conditions(spec, 0.0, 0.01), ValidationError);
    spec.c = CoefficientFn::constant(0.0);
    spec.k = RationalExponent{0};
    EXPECT_THROW(derive_initial_conditions(spec, 0.02, 0.01), ValidationError);
}

TEST(WellPosedness, Verdicts) {
    ModelSpec linear;
    EXPECT_TRUE(check_well_posedness(linear).guaranteed());
    EXPECT_TRUE(check_well_posedness(linear).reasons.empty());

    ModelSpec quadratic;
    quadratic.m = RationalExponent{2};
    auto w = check_well_posedness(quadratic);
    ASSERT_FALSE(w.guaranteed());
    ASSERT_EQ(w.reasons.size(), 1u);
    EXPECT_EQ(w.reasons[0].exponent, 'm');
    EXPECT_EQ(w.reasons[0].condition, WellPosedness::Condition::LinearGrowth);

    ModelSpec root;
    root.m = RationalExponent{1, 3};
    w = check_well_posedness(root);
    ASSERT_FALSE(w.guaranteed());
    EXPECT_EQ(w.reasons[0].condition, WellPosedness::Condition::Lipschitz);
}

TEST(WellPosedness, Monotone) {
    ModelSpec spec;
    spec.l = RationalExponent{2};
    ASSERT_FALSE(check_well_posedness(spec).guaranteed());
    spec.n = RationalExponent{3};
    EXPECT_FALSE(check_well_posedness(spec).guaranteed());
    EXPECT_EQ(check_well_posedness(spec).reasons.size(), 2u);
}

TEST(LinearCase, Classification) {
    auto r = classify_linear_case(2.0, 0.0, 1.0);
    EXPECT_EQ(r.kind, LinearClassification::Kind::DistinctReal);
    EXPECT_DOUBLE_EQ(r.discriminant, 4.0);
    EXPECT_DOUBLE_EQ(r.root1.real(), 0.0);
    EXPECT_DOUBLE_EQ(r.root2.real(), 2.0);

    r = classify_linear_case(0.0, -1.0, 1.0);
    EXPECT_EQ(r.kind, LinearClassification::Kind::ComplexConjugate);
    EXPECT_DOUBLE_EQ(std::fabs(r.root1.imag()), 1.0);

    r = classify_linear_case(2.0, -1.0, 1.0);
    EXPECT_EQ(r.kind, LinearClassification::Kind::EqualReal);
    EXPECT_DOUBLE_EQ(r.root1.real(), 1.0);
}

TEST(LinearCase, RootsSolveCharacteristicEquation) {
    for (double a : {-1.5, 0.0, 0.3, 2.0}) {
        for (double b : {-2.0, -0.1, 0.0, 0.7}) {
            for (double c : {-1.0, 0.5, 3.0}) {
                const auto r = classify_linear_case(a, b, c);
                for (auto lam : {r.root1, r.root2}) {
                    const auto res = lam * lam - a * lam - c * b;
                    EXPECT_LE(std::abs(res), 1e-12 * (1.0 + std::norm(lam)));
                }
            }
        }
    }
}

TEST(Grid, UniformNodes) {
    const Grid g(5.0, 5000);
    EXPECT_DOUBLE_EQ(g.dt(), 1e-3);
    EXPECT_EQ(g.size(), 5001u);
    EXPECT_EQ(g.time(0), 0.0);
    EXPECT_EQ(g.time(5000), 5.0);
    EXPECT_EQ(Grid::from_step(5.0, 1e-3), g);
    EXPECT_THROW(Grid::from_step(5.0, 0.0), ValidationError);
    EXPECT_THROW(Grid::from_step(1.0, 0.3), ValidationError);
    EXPECT_EQ(g.coarsened(10).steps(), 500u);
}
