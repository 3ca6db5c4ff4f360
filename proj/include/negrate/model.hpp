#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "coefficient.hpp"
#include "errors.hpp"
#include "power.hpp"

namespace negrate {

/// Coefficients and exponents of the coupled (rate, force) system
///
///   dr = c(t) p^m dt
///   dp = [a(t) p^l + b(t) r^n] dt + sigma(t) r^k dW
struct ModelSpec {
    CoefficientFn a;
    CoefficientFn b;
    CoefficientFn c = CoefficientFn::constant(1.0);
    CoefficientFn sigma = CoefficientFn::constant(1.0);
    RationalExponent m{1};
    RationalExponent n{1};
    RationalExponent k{0};
    RationalExponent l{1};
    PowerMode power_mode = PowerMode::OddRootReal;

    /// Checks the standing assumptions that do not depend on an evaluation grid.
    void validate() const {
        if (m.is_zero()) {
            throw ValidationError("exponent m must be nonzero");
        }
        if (c(0.0) == 0.0) {
            throw ValidationError("c(0) must be nonzero");
        }
        if (!(sigma(0.0) > 0.0)) {
            throw ValidationError("sigma(0) must be positive");
        }
    }

    bool operator==(const ModelSpec&) const = default;
};

struct InitialConditions {
    double A = 0.0;   ///< r(0)
    double B = 0.0;   ///< r'(0) = c(0) p0^m
    double p0 = 0.0;  ///< initial force
    double z0 = 0.0;  ///< initial value of the transformed force

    bool operator==(const InitialConditions&) const = default;
};

/// Solves B = c(0) p0^m for the initial force and maps it through the
/// noise-removing transformation: z0 = p0 / (sigma(0) A^k).
inline InitialConditions derive_initial_conditions(const ModelSpec& spec, double A, double B) {
    spec.validate();
    if (!spec.k.is_zero() && !(A > 0.0)) {
        throw ValidationError("initial rate A must be positive when k != 0");
    }
    const double ratio = B / spec.c(0.0);
    const double p0 = power(ratio, spec.m.reciprocal(), spec.power_mode);
    const double scale = spec.sigma(0.0) * power(A, spec.k, spec.power_mode);
    return InitialConditions{A, B, p0, p0 / scale};
}

struct WellPosedness {
    enum class Verdict { Guaranteed, Unverified };
    enum class Condition { LinearGrowth, Lipschitz };

    struct Reason {
        char exponent;  ///< 'm', 'n', 'l' or 'k'
        RationalExponent value;
        Condition condition;

        std::string describe() const {
            return std::string("exponent ") + exponent + "=" + value.to_string() + " violates " +
                   (condition == Condition::LinearGrowth ? "linear growth" : "Lipschitz continuity at 0");
        }
    };

    Verdict verdict = Verdict::Guaranteed;
    std::vector<Reason> reasons;

    bool guaranteed() const noexcept { return verdict == Verdict::Guaranteed; }
};

/// Syntactic sufficient condition for existence and uniqueness: drift and
/// diffusion are globally Lipschitz with linear growth when every exponent
/// is 0 or 1. Anything else is reported, not rejected.
inline WellPosedness check_well_posedness(const ModelSpec& spec) {
    WellPosedness out;
    auto inspect = [&](char name, RationalExponent e) {
        if (e == RationalExponent{0} || e == RationalExponent{1}) {
            return;
        }
        const double v = e.value();
        if (v > 1.0) {
            out.reasons.push_back({name, e, WellPosedness::Condition::LinearGrowth});
        } else {
            out.reasons.push_back({name, e, WellPosedness::Condition::Lipschitz});
        }
    };
    inspect('m', spec.m);
    inspect('n', spec.n);
    inspect('l', spec.l);
    inspect('k', spec.k);
    out.verdict = out.reasons.empty() ? WellPosedness::Verdict::Guaranteed
                                      : WellPosedness::Verdict::Unverified;
    return out;
}

/// Roots of the characteristic equation lambda^2 - a lambda - c b = 0 of the
/// linear configuration (k = 0, l = m = n = 1, constant coefficients).
struct LinearClassification {
    enum class Kind { EqualReal, DistinctReal, ComplexConjugate };

    Kind kind;
    double discriminant;
    std::complex<double> root1;
    std::complex<double> root2;
};

inline LinearClassification classify_linear_case(double a, double b, double c) {
    const double d = 4.0 * c * b + a * a;
    const double scale = a * a + std::fabs(4.0 * c * b);
    LinearClassification out{};
    out.discriminant = d;
    if (std::fabs(d) <= 1e-14 * scale) {
        out.kind = LinearClassification::Kind::EqualReal;
        out.root1 = out.root2 = {a / 2.0, 0.0};
    } else if (d > 0.0) {
        out.kind = LinearClassification::Kind::DistinctReal;
        const double s = std::sqrt(d);
        out.root1 = {(a - s) / 2.0, 0.0};
        out.root2 = {(a + s) / 2.0, 0.0};
    } else {
        out.kind = LinearClassification::Kind::ComplexConjugate;
        const double s = std::sqrt(-d);
        out.root1 = {a / 2.0, -s / 2.0};
        out.root2 = {a / 2.0, s / 2.0};
    }
    return out;
}

}  // namespace negrate
