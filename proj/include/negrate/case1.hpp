#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

#include "coefficient.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "kernels.hpp"
#include "model.hpp"
#include "numerics.hpp"
#include "power.hpp"

namespace negrate::case1 {

/// Configuration k = 0, l = 1, b = 0 of the primal system:
///   dr = c(t) p^m dt,  dp = a(t) p dt + sigma(t) dW.
struct Case1Config {
    CoefficientFn a;
    CoefficientFn c = CoefficientFn::constant(1.0);
    CoefficientFn sigma = CoefficientFn::constant(1.0);
    unsigned m = 2;
    double A = 0.0;
    double B = 0.0;
    PowerMode power_mode = PowerMode::OddRootReal;

    static Case1Config from_spec(const ModelSpec& spec, double A, double B) {
        if (!spec.k.is_zero() || spec.l != RationalExponent{1} || !spec.b.is_identically_zero()) {
            throw ValidationError("case I needs k = 0, l = 1 and b = 0");
        }
        if (!spec.m.is_integer() || spec.m.numerator() < 1) {
            throw ValidationError("case I analytics need a positive integer m");
        }
        return Case1Config{spec.a, spec.c, spec.sigma, static_cast<unsigned>(spec.m.numerator()), A, B,
                           spec.power_mode};
    }

    ModelSpec to_spec() const {
        ModelSpec spec;
        spec.a = a;
        spec.b = CoefficientFn::constant(0.0);
        spec.c = c;
        spec.sigma = sigma;
        spec.m = RationalExponent{static_cast<std::int64_t>(m)};
        spec.n = RationalExponent{1};
        spec.k = RationalExponent{0};
        spec.l = RationalExponent{1};
        spec.power_mode = power_mode;
        return spec;
    }

    /// c1 = (B / c(0))^(1/m), the initial force.
    double c1() const {
        return power(B / c(0.0), RationalExponent{1, static_cast<std::int64_t>(m)}, power_mode);
    }
};

enum class Method { ExactEven, ExactOdd, BinomialSum, TaylorApprox, Hypergeom, LowerBoundOnly };

inline std::string_view to_string(Method m) {
    switch (m) {
        case Method::ExactEven: return "exact-even";
        case Method::ExactOdd: return "exact-odd";
        case Method::BinomialSum: return "binomial-sum";
        case Method::TaylorApprox: return "taylor-approx";
        case Method::Hypergeom: return "hypergeometric";
        case Method::LowerBoundOnly: return "lower-bound-only";
    }
    return "?";
}

/// Closed-form mean and variance curves.
struct MomentReport {
    std::vector<double> times;
    std::vector<double> mean;
    std::vector<double> variance;
    Method mean_method = Method::ExactEven;
    Method variance_method = Method::ExactEven;
    KernelMode kernel_mode = KernelMode::Corrected;
    /// False when the variance is a linearisation that may go negative.
    bool variance_nonnegative = true;
};

namespace detail {

inline double double_factorial_odd(unsigned j) {  // (2j - 1)!!
    double out = 1.0;
    for (unsigned i = 1; i <= j; ++i) out *= static_cast<double>(2 * i - 1);
    return out;
}

inline double binomial(unsigned n, unsigned k) {
    double out = 1.0;
    for (unsigned i = 1; i <= k; ++i) out = out * static_cast<double>(n - k + i) / static_cast<double>(i);
    return out;
}

/// integral_0^t u^j e^{-s u} du for complex s.
inline std::complex<double> power_exp_integral(unsigned j, std::complex<double> s, double t) {
    if (std::abs(s) * t < 1.0) {
        // sum_n (-s)^n t^(n+j+1) / (n! (n+j+1))
        std::complex<double> sum = 0.0;
        std::complex<double> term = 1.0;  // (-s t)^n / n!
        for (unsigned n = 0; n < 60; ++n) {
            if (n > 0) term *= -s * t / static_cast<double>(n);
            sum += term / static_cast<double>(n + j + 1);
            if (std::abs(term) < 1e-18 * std::abs(sum)) break;
        }
        return sum * std::pow(t, static_cast<double>(j + 1));
    }
    // I_j = -t^j e^{-st}/s + (j/s) I_{j-1},  I_0 = (1 - e^{-st})/s
    const std::complex<double> e = std::exp(-s * t);
    std::complex<double> I = (1.0 - e) / s;
    double tj = 1.0;
    for (unsigned i = 1; i <= j; ++i) {
        tj *= t;
        I = -tj * e / s + static_cast<double>(i) / s * I;
    }
    return I;
}

}  // namespace detail

/// integral_0^t c(u) u^j du: closed form for the constant, exponential and
/// cosine coefficients, composite trapezoid with `nodes` intervals
/// otherwise.
inline double moment_integral(const CoefficientFn& c, unsigned j, double t, std::size_t nodes = 1u << 14) {
    if (t < 0.0) throw ValidationError("moment_integral needs t >= 0");
    if (t == 0.0) return 0.0;
    if (auto v = c.constant_value()) {
        return *v * std::pow(t, static_cast<double>(j + 1)) / static_cast<double>(j + 1);
    }
    if (auto e = std::get_if<CoefficientFn::ScaledExp>(&c.variant())) {
        return e->value * detail::power_exp_integral(j, {e->rate, 0.0}, t).real();
    }
    if (auto k = std::get_if<CoefficientFn::ScaledCos>(&c.variant())) {
        // Re integral u^j e^{i w u} du
        return k->value * detail::power_exp_integral(j, {0.0, -k->frequency}, t).real();
    }
    const auto g = numerics::QuadGrid::uniform(0.0, t, nodes);
    double sum = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        sum += g.weights[i] * c(g.nodes[i]) * std::pow(g.nodes[i], static_cast<double>(j));
    }
    return sum;
}

/// L(m; c) = m! / (2^(m/2) (m/2)!) * integral_0^t c(u) u^(m/2) du, m even.
inline double L_integral(unsigned m, const CoefficientFn& c, double t) {
    if (m == 0 || m % 2 == 1) throw ValidationError("L(m; c) is defined for even m >= 2");
    return detail::double_factorial_odd(m / 2) * moment_integral(c, m / 2, t);
}

namespace detail {

inline double constant_sigma(const Case1Config& cfg) {
    auto s = cfg.sigma.constant_value();
    if (!s || !(*s > 0.0)) {
        throw ValidationError("case I moment formulas need a constant positive sigma");
    }
    if (!cfg.a.is_identically_zero()) {
        throw ValidationError("case I moment formulas need a = 0");
    }
    if (cfg.power_mode == PowerMode::SignedPower && cfg.m % 2 == 0) {
        throw ValidationError("case I moment formulas assume ordinary powers; even m under the signed power differs");
    }
    if (cfg.m < 1) throw ValidationError("case I needs m >= 1");
    return *s;
}

}  // namespace detail

/// E[R_t] for constant sigma and a = 0.
///
///   B = 0:  A + sigma^m L(m; c) for even m, A for odd m
///   B != 0: A + sum_j C(m, m-2j) (B/c(0))^((m-2j)/m) sigma^(2j) (2j-1)!!
///               * integral_0^t c(u) u^j du
///
/// The powers of B/c(0) are taken as reduced rationals, so the mean is
/// defined even when (B/c(0))^(1/m) itself has no real value.
inline double case1_mean(const Case1Config& cfg, double t) {
    const double sigma = detail::constant_sigma(cfg);
    if (t < 0.0) throw ValidationError("case1_mean needs t >= 0");
    const unsigned m = cfg.m;
    if (cfg.B == 0.0) {
        if (m % 2 == 1) return cfg.A;
        return cfg.A + std::pow(sigma, m) * L_integral(m, cfg.c, t);
    }
    const double ratio = cfg.B / cfg.c(0.0);
    double sum = 0.0;
    for (unsigned j = 0; j <= m / 2; ++j) {
        const RationalExponent e{static_cast<std::int64_t>(m - 2 * j), static_cast<std::int64_t>(m)};
        sum += detail::binomial(m, m - 2 * j) * power(ratio, e, PowerMode::OddRootReal) *
               std::pow(sigma, 2.0 * j) * detail::double_factorial_odd(j) * moment_integral(cfg.c, j, t);
    }
    return cfg.A + sum;
}

/// Var[R_t] at every node of `grid`.
///
/// B = 0 (exact): sigma^(2m) [ double integral of c(s) c(u) K(s, u) - L^2 ],
/// with K = E[W_s^m W_u^m] (Corrected) or the unscaled correlation kernel
/// E_m (PaperLiteral); the L^2 term is absent for odd m.
/// B != 0 (first-order linearisation of (sigma W + c1)^m around c1):
/// m^2 sigma^2 c1^(2m-2) double integral of c(s) c(u) min(s, u).
inline std::vector<double> case1_variance_curve(const Case1Config& cfg, const Grid& grid,
                                                KernelMode mode = KernelMode::Corrected) {
    const double sigma = detail::constant_sigma(cfg);
    const unsigned m = cfg.m;
    const auto ts = grid.times();
    const double h = grid.dt();
    std::vector<double> cs(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) cs[i] = cfg.c(ts[i]);

    if (cfg.B != 0.0) {
        const double c1 = cfg.c1();
        const double scale = static_cast<double>(m * m) * sigma * sigma *
                             power(c1, RationalExponent{2 * static_cast<std::int64_t>(m) - 2});
        auto cov = numerics::cumulative_double_trapz(ts.size(), h, [&](std::size_t i, std::size_t j) {
            return cs[i] * cs[j] * std::min(ts[i], ts[j]);
        });
        for (double& v : cov) v *= scale;
        return cov;
    }

    auto kernel = [&](std::size_t i, std::size_t j) {
        const double k = mode == KernelMode::Corrected ? negrate::detail::wiener_product_kernel(m, ts[i], ts[j])
                                                       : correlation_kernel(m, ts[i], ts[j]);
        return cs[i] * cs[j] * k;
    };
    auto second = numerics::cumulative_double_trapz(ts.size(), h, kernel);
    std::vector<double> L(ts.size(), 0.0);
    if (m % 2 == 0) {
        std::vector<double> integrand(ts.size());
        for (std::size_t i = 0; i < ts.size(); ++i) {
            integrand[i] = cs[i] * std::pow(ts[i], m / 2.0);
        }
        L = numerics::cumtrapz(integrand, h);
        for (double& v : L) v *= detail::double_factorial_odd(m / 2);
    }
    const double scale = std::pow(sigma, 2.0 * m);
    std::vector<double> out(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) out[i] = scale * (second[i] - L[i] * L[i]);
    return out;
}

/// Var[R_t] by tensor trapezoid with `nodes` intervals on [0, t].
inline double case1_variance(const Case1Config& cfg, double t, KernelMode mode = KernelMode::Corrected,
                             std::size_t nodes = 2000) {
    if (t < 0.0) throw ValidationError("case1_variance needs t >= 0");
    detail::constant_sigma(cfg);
    if (t == 0.0) return 0.0;
    return case1_variance_curve(cfg, Grid(t, nodes), mode).back();
}

/// Mean and variance at the nodes `idx` of `grid`.
inline MomentReport case1_moment_report(const Case1Config& cfg, const Grid& grid, std::span<const std::size_t> idx,
                                        KernelMode mode = KernelMode::Corrected) {
    MomentReport rep;
    rep.kernel_mode = mode;
    if (cfg.B == 0.0) {
        rep.mean_method = rep.variance_method = cfg.m % 2 == 0 ? Method::ExactEven : Method::ExactOdd;
    } else {
        rep.mean_method = Method::BinomialSum;
        rep.variance_method = Method::TaylorApprox;
        rep.variance_nonnegative = false;
    }
    const auto var = case1_variance_curve(cfg, grid, mode);
    for (std::size_t i : idx) {
        const double t = grid.time(i);
        rep.times.push_back(t);
        rep.mean.push_back(case1_mean(cfg, t));
        rep.variance.push_back(var[i]);
    }
    return rep;
}

/// Pathwise solution for general a(t), sigma(t):
///
///   g = a - sigma'/sigma,  G(u) = integral_0^u g
///   z(u) = e^{G(u)} ( 1/2 integral_0^u e^{-G(s)} (1 + g(s)(2 W_s - s)) ds + c1 / sigma(0) )
///   R_t = A + integral_0^t c(u) sigma(u)^m (z(u) + W_u - u/2)^m du
///
/// with every integral a cumulative trapezoid on the Wiener grid.
inline std::vector<double> case1_exact_path(const Case1Config& cfg, const WienerPath& w) {
    const std::size_t n = w.size();
    if (n < 2) throw ValidationError("case1_exact_path needs a path with >= 2 nodes");
    const auto& ts = w.times;
    const double z0 = cfg.c1() / cfg.sigma(0.0);
    std::vector<double> g(n), sig(n);
    for (std::size_t i = 0; i < n; ++i) {
        sig[i] = cfg.sigma(ts[i]);
        if (!(sig[i] > 0.0)) throw ValidationError("sigma must stay positive");
        g[i] = cfg.a(ts[i]) - cfg.sigma.derivative(ts[i]) / sig[i];
    }
    const auto G = numerics::cumtrapz(g, ts);
    std::vector<double> inner(n);
    for (std::size_t i = 0; i < n; ++i) {
        inner[i] = std::exp(-G[i]) * (1.0 + g[i] * (2.0 * w.values[i] - ts[i]));
    }
    const auto H = numerics::cumtrapz(inner, ts);
    const RationalExponent m{static_cast<std::int64_t>(cfg.m)};
    std::vector<double> integrand(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double z = std::exp(G[i]) * (0.5 * H[i] + z0);
        const double bracket = z + w.values[i] - 0.5 * ts[i];
        integrand[i] = cfg.c(ts[i]) * std::pow(sig[i], static_cast<double>(cfg.m)) * power(bracket, m, cfg.power_mode);
    }
    auto R = numerics::cumtrapz(integrand, ts);
    for (double& v : R) v += cfg.A;
    return R;
}

/// E[R_t] for constant c != 0 and B != 0 as a terminating hypergeometric sum:
///   A + B t c^(1-m) 3F1([1, -m/2, 1/2 - m/2]; [2]; 2 c^2 sigma^2 t B^(-2/m)).
inline double case1_mean_hypergeom(unsigned m, double c, double sigma, double A, double B, double t) {
    if (m < 1) throw ValidationError("hypergeometric mean needs a positive integer m");
    if (B == 0.0) throw ValidationError("hypergeometric mean needs B != 0");
    if (c == 0.0) throw ValidationError("hypergeometric mean needs c != 0");
    const double md = static_cast<double>(m);
    const double x = 2.0 * c * c * sigma * sigma * t * power(B, RationalExponent{-2, static_cast<std::int64_t>(m)});
    const double f = numerics::hypergeom_3f1_terminating(1.0, -md / 2.0, 0.5 - md / 2.0, 2.0, x);
    return A + B * t * power(c, RationalExponent{1 - static_cast<std::int64_t>(m)}) * f;
}

/// Gamma-kernel expression offered as a lower estimate of Var[R_t] for
/// B = 0, even m and c > 0 (with F(t) = t^2):
///
///   sigma^(2m) m! ( m! 2^m Gamma(m + 1/2) t^2 / (sqrt(pi) Gamma(m+1)^2)
///                   - t^(m/2+1) max_[0,t] c / ((m/2 + 1)! 2^(m/2)) )
///
/// Returned as a diagnostic only; it is not a valid bound in general
/// (for m = 2, c = 1, sigma = 1, t = 1 it gives 2.5 against Var = 1/3).
inline double variance_lower_bound(unsigned m, const CoefficientFn& c, double sigma, double t,
                                   std::size_t scan_nodes = 10000) {
    if (m == 0 || m % 2 == 1) throw ValidationError("variance_lower_bound needs an even m");
    if (t < 0.0) throw ValidationError("variance_lower_bound needs t >= 0");
    double cmax = c(0.0);
    if (!(cmax > 0.0)) throw ValidationError("variance_lower_bound needs c > 0 on [0, t]");
    if (t > 0.0) {
        const auto g = numerics::QuadGrid::uniform(0.0, t, scan_nodes);
        for (double u : g.nodes) {
            const double v = c(u);
            if (!(v > 0.0)) throw ValidationError("variance_lower_bound needs c > 0 on [0, t]");
            cmax = std::max(cmax, v);
        }
    }
    const double md = static_cast<double>(m);
    const double log_mfact = std::lgamma(md + 1.0);
    const double gamma_term = std::exp(log_mfact + md * std::numbers::ln2 + std::lgamma(md + 0.5) -
                                       0.5 * std::log(std::numbers::pi) - 2.0 * std::lgamma(md + 1.0));
    const double first = gamma_term * t * t;
    const double second = std::pow(t, md / 2.0 + 1.0) * cmax /
                           (std::exp(std::lgamma(md / 2.0 + 2.0)) * std::pow(2.0, md / 2.0));
    return std::pow(sigma, 2.0 * md) * std::exp(log_mfact) * (first - second);
}

struct LowerBoundReport {
    double bound = 0.0;
    double exact_variance = 0.0;
    /// Set when the "lower bound" is larger than the variance it bounds.
    bool exceeds_exact = false;
};

/// variance_lower_bound next to the quadrature variance for constant sigma,
/// a = 0, B = 0.
inline LowerBoundReport variance_lower_bound_report(unsigned m, const CoefficientFn& c, double sigma, double t,
                                                    std::size_t nodes = 2000) {
    LowerBoundReport rep;
    rep.bound = variance_lower_bound(m, c, sigma, t);
    Case1Config cfg{CoefficientFn::constant(0.0), c, CoefficientFn::constant(sigma), m, 0.0, 0.0};
    rep.exact_variance = case1_variance(cfg, t, KernelMode::Corrected, nodes);
    rep.exceeds_exact = rep.bound > rep.exact_variance;
    return rep;
}

}  // namespace negrate::case1
