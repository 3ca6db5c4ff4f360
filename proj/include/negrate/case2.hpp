#pragma once

#include <cmath>
#include <vector>

#include "coefficient.hpp"
#include "engine.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "kernels.hpp"
#include "model.hpp"
#include "numerics.hpp"
#include "power.hpp"

namespace negrate::case2 {

/// k = n = 0, l = 2, constant sigma and the path-dependent
///   b(t) = -sigma/2 - a(t) (W_t - t/2)^2 sigma^2,
/// so that
///   dr = c p^m dt,  dp = [a p^2 - a (W - t/2)^2 sigma^2 - sigma/2] dt + sigma dW.
struct Case2Config {
    CoefficientFn a;
    double sigma = 0.01;
    CoefficientFn c = CoefficientFn::constant(1.0);
    RationalExponent m{2};
    double A = 0.02;
    double B = -0.025;
    PowerMode power_mode = PowerMode::OddRootReal;

    void validate() const {
        if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValidationError("case II needs a constant sigma > 0");
        if (!(m.value() > 0.0)) throw ValidationError("case II needs m > 0");
        if (B == 0.0) throw ValidationError("case II needs B != 0 (K divides by B^(1/m))");
        if (c(0.0) == 0.0) throw ValidationError("case II needs c(0) != 0");
    }

    /// (c(0)/B)^(1/m)
    double cp() const {
        validate();
        return power(c(0.0) / B, m.reciprocal(), power_mode);
    }
    double K() const { return sigma * cp(); }
    double z0() const { return 1.0 / K(); }
    double p0() const { return power(B / c(0.0), m.reciprocal(), power_mode); }

    /// The primal model with b frozen at zero; b is supplied along the path.
    ModelSpec to_spec() const {
        ModelSpec spec;
        spec.a = a;
        spec.b = CoefficientFn::constant(0.0);
        spec.c = c;
        spec.sigma = CoefficientFn::constant(sigma);
        spec.m = m;
        spec.n = RationalExponent{0};
        spec.k = RationalExponent{0};
        spec.l = RationalExponent{2};
        spec.power_mode = power_mode;
        return spec;
    }
};

/// Euler-Maruyama on the primal system; b uses the same Wiener values as
/// the increments.
inline PathPair simulate_case2_primal(const Case2Config& cfg, const WienerPath& w) {
    const std::size_t n = w.size();
    if (n < 2) throw ValidationError("case II simulation needs >= 2 grid nodes");
    const double p0 = cfg.p0();
    const double s = cfg.sigma;
    PathPair out;
    out.times = w.times;
    out.kind = PathPair::Second::Force;
    out.r.assign(n, 0.0);
    out.second.assign(n, 0.0);
    out.r[0] = cfg.A;
    out.second[0] = p0;
    detail::step_loop(n - 1, [&](std::size_t i) {
        const double t = w.times[i];
        const double dt = w.times[i + 1] - t;
        const double p = out.second[i];
        const double a = cfg.a(t);
        const double shift = w.values[i] - 0.5 * t;
        const double drift = a * p * p - a * shift * shift * s * s - 0.5 * s;
        const double r_next = out.r[i] + cfg.c(t) * power(p, cfg.m, cfg.power_mode) * dt;
        const double p_next = p + drift * dt + s * w.increment(i);
        detail::check_state(i + 1, r_next, p_next);
        out.r[i + 1] = r_next;
        out.second[i + 1] = p_next;
    });
    return out;
}

/// Closed-form solution of dz = sigma a z (2u - z) dt along the path:
///   z_t = E_t / (K - sigma integral_0^t E_u a(u) du),
///   E_t = exp(sigma integral_0^t a(u) (2 W_u - u) du).
inline std::vector<double> bernoulli_z(const Case2Config& cfg, const WienerPath& w) {
    const std::size_t n = w.size();
    if (n < 1) throw ValidationError("bernoulli_z needs a nonempty path");
    const double K = cfg.K();
    const auto& ts = w.times;
    std::vector<double> av(n), inner(n);
    for (std::size_t i = 0; i < n; ++i) {
        av[i] = cfg.a(ts[i]);
        inner[i] = av[i] * (2.0 * w.values[i] - ts[i]);
    }
    const auto G = numerics::cumtrapz(inner, ts);
    std::vector<double> E(n), Ea(n);
    for (std::size_t i = 0; i < n; ++i) {
        E[i] = std::exp(cfg.sigma * G[i]);
        Ea[i] = E[i] * av[i];
    }
    const auto I = numerics::cumtrapz(Ea, ts);
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double den = K - cfg.sigma * I[i];
        if (!(std::fabs(den) > 1e-10) || !std::isfinite(E[i])) {
            throw SingularDenominator("bernoulli_z: denominator " + detail::format_double(den) + " at t=" +
                                      detail::format_double(ts[i]));
        }
        z[i] = E[i] / den;
    }
    return z;
}

/// Euler steps of dz = sigma a z (2u - z) dt, u = z + W - t/2, on the same
/// path; the discretisation bernoulli_z is checked against.
inline std::vector<double> euler_z(const Case2Config& cfg, const WienerPath& w) {
    const std::size_t n = w.size();
    std::vector<double> z(n);
    z[0] = cfg.z0();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double t = w.times[i];
        const double u = z[i] + w.values[i] - 0.5 * t;
        z[i + 1] = z[i] + cfg.sigma * cfg.a(t) * z[i] * (2.0 * u - z[i]) * (w.times[i + 1] - t);
    }
    return z;
}

namespace detail {

inline std::vector<double> rate_quadrature(const Case2Config& cfg, const std::vector<double>& ts,
                                           const std::vector<double>& bracket) {
    const double sm = std::pow(cfg.sigma, cfg.m.value());
    std::vector<double> integrand(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        integrand[i] = power(bracket[i], cfg.m, cfg.power_mode) * sm * cfg.c(ts[i]);
    }
    auto R = numerics::cumtrapz(integrand, ts);
    for (double& v : R) v += cfg.A;
    return R;
}

}  // namespace detail

/// R_t = A + integral_0^t (z_u + W_u - u/2)^m sigma^m c(u) du.
inline std::vector<double> case2_exact_path(const Case2Config& cfg, const WienerPath& w) {
    const auto z = bernoulli_z(cfg, w);
    std::vector<double> bracket(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) bracket[i] = z[i] + w.values[i] - 0.5 * w.times[i];
    return detail::rate_quadrature(cfg, w.times, bracket);
}

/// F and its functional derivative at the zero path, on a grid.
struct LinearizedF {
    std::vector<double> times;
    std::vector<double> F0;
    std::vector<double> DF0;
};

/// With e(u) = exp(-sigma integral_0^u a(v) v dv), I(u) = integral_0^u e a dv
/// and cp = (c(0)/B)^(1/m):
///   F0  = e / (sigma (cp - I))
///   DF0 = a(0) e cp / (I - cp)^2
inline LinearizedF linearize_F(const Case2Config& cfg, const Grid& grid) {
    const double cp = cfg.cp();
    const auto ts = grid.times();
    const std::size_t n = ts.size();
    std::vector<double> av(n), av_t(n);
    for (std::size_t i = 0; i < n; ++i) {
        av[i] = cfg.a(ts[i]);
        av_t[i] = av[i] * ts[i];
    }
    const auto G = numerics::cumtrapz(av_t, ts);
    std::vector<double> e(n), ea(n);
    for (std::size_t i = 0; i < n; ++i) {
        e[i] = std::exp(-cfg.sigma * G[i]);
        ea[i] = e[i] * av[i];
    }
    const auto I = numerics::cumtrapz(ea, ts);
    const double a0 = cfg.a(0.0);
    LinearizedF out;
    out.times = ts;
    out.F0.resize(n);
    out.DF0.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double gap = cp - I[i];
        if (!(std::fabs(gap) > 1e-10) || !std::isfinite(e[i])) {
            throw SingularDenominator("linearize_F: denominator " + negrate::detail::format_double(gap) + " at t=" +
                                      negrate::detail::format_double(ts[i]));
        }
        out.F0[i] = e[i] / (cfg.sigma * gap);
        out.DF0[i] = a0 * e[i] * cp / (gap * gap);
    }
    return out;
}

/// R_t ~ A + integral_0^t (F0(u) + (DF0(u) + 1) W_u - u/2)^m sigma^m c(u) du.
inline std::vector<double> case2_linearized_path(const Case2Config& cfg, const LinearizedF& lin,
                                                 const WienerPath& w) {
    if (lin.times.size() != w.size()) {
        throw ValidationError("linearization and Wiener path must share a grid");
    }
    std::vector<double> bracket(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        bracket[i] = lin.F0[i] + (lin.DF0[i] + 1.0) * w.values[i] - 0.5 * w.times[i];
    }
    return detail::rate_quadrature(cfg, w.times, bracket);
}

struct MomentCurves {
    std::vector<double> times;
    std::vector<double> mean;
    std::vector<double> variance;
};

/// m = 2 moments of the linearised process at every node of `grid`.
/// With f = F0 - u/2, g = DF0 + 1 and Y_u = f_u + g_u W_u:
///   mean = A + sigma^2 integral c (f^2 + g^2 u)
///   var  = sigma^4 double integral c(u) c(s) E[Y_u^2 Y_s^2] - (mean - A)^2
///   E[Y_u^2 Y_s^2] = f_u^2 f_s^2 + f_u^2 g_s^2 s + f_s^2 g_u^2 u
///                    + 4 f_u f_s g_u g_s E1 + g_u^2 g_s^2 E2
/// Corrected: E1 = min(u, s), E2 = u s + 2 min(u, s)^2. PaperLiteral uses the
/// unscaled correlation kernels and a sigma^2 prefactor.
inline MomentCurves case2_moment_curves(const Case2Config& cfg, const Grid& grid,
                                        KernelMode mode = KernelMode::Corrected) {
    if (cfg.m != RationalExponent{2}) throw ValidationError("case II moment approximations are derived for m = 2 only");
    const auto lin = linearize_F(cfg, grid);
    const auto& ts = lin.times;
    const std::size_t n = ts.size();
    std::vector<double> f(n), g(n), cs(n), mean_integrand(n);
    for (std::size_t i = 0; i < n; ++i) {
        f[i] = lin.F0[i] - 0.5 * ts[i];
        g[i] = lin.DF0[i] + 1.0;
        cs[i] = cfg.c(ts[i]);
        mean_integrand[i] = (f[i] * f[i] + g[i] * g[i] * ts[i]) * cfg.sigma * cfg.sigma * cs[i];
    }
    const auto M = numerics::cumtrapz(mean_integrand, grid.dt());
    auto kernel = [&](std::size_t i, std::size_t j) {
        const double u = ts[i], s = ts[j];
        const double mn = std::min(u, s);
        const double e1 = mode == KernelMode::Corrected ? mn : correlation_kernel(1, u, s);
        const double e2 = mode == KernelMode::Corrected ? u * s + 2.0 * mn * mn : correlation_kernel(2, u, s);
        const double fu2 = f[i] * f[i], fs2 = f[j] * f[j], gu2 = g[i] * g[i], gs2 = g[j] * g[j];
        return cs[i] * cs[j] *
               (fu2 * fs2 + fu2 * gs2 * s + fs2 * gu2 * u + 4.0 * f[i] * f[j] * g[i] * g[j] * e1 + gu2 * gs2 * e2);
    };
    const auto Q = numerics::cumulative_double_trapz(n, grid.dt(), kernel);
    const double pre = mode == KernelMode::Corrected ? std::pow(cfg.sigma, 4) : cfg.sigma * cfg.sigma;
    MomentCurves out;
    out.times = ts;
    out.mean.resize(n);
    out.variance.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.mean[i] = cfg.A + M[i];
        out.variance[i] = pre * Q[i] - M[i] * M[i];
    }
    return out;
}

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
};

/// Mean and variance at time t, by quadrature with `nodes` intervals.
inline Moments case2_approx_moments_m2(const Case2Config& cfg, double t, KernelMode mode = KernelMode::Corrected,
                                       std::size_t nodes = 1000) {
    if (cfg.m != RationalExponent{2}) throw ValidationError("case II moment approximations are derived for m = 2 only");
    if (t < 0.0) throw ValidationError("case2 moments need t >= 0");
    cfg.validate();
    if (t == 0.0) return {cfg.A, 0.0};
    const auto curves = case2_moment_curves(cfg, Grid(t, nodes), mode);
    return {curves.mean.back(), curves.variance.back()};
}

}  // namespace negrate::case2
