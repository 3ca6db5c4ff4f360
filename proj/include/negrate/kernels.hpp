#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"

namespace negrate {

/// Master seed plus the per-path derivation rule.
///
/// path(i) = splitmix64_finalize(master + (i + 1) * golden_gamma). For a
/// fixed master the map i -> master + (i + 1) * gamma is injective modulo
/// 2^64 (gamma is odd) and the finalizer is a bijection, so distinct paths
/// never share a seed.
struct Seed {
    std::uint64_t master = 0;

    static constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ull;

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    constexpr std::uint64_t path(std::uint64_t index) const noexcept {
        return mix(master + (index + 1) * golden_gamma);
    }
};

inline std::uint64_t path_seed(std::uint64_t master, std::uint64_t index) {
    return Seed{master}.path(index);
}

/// Brownian trajectory sampled on a grid, W(t_0) = 0.
struct WienerPath {
    std::vector<double> times;
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    double increment(std::size_t i) const { return values[i + 1] - values[i]; }

    /// Every `factor`-th sample; the coarse path is the same Brownian motion.
    WienerPath coarsened(std::size_t factor) const {
        if (factor < 1 || (size() - 1) % factor != 0) {
            throw ValidationError("coarsening factor must divide the step count");
        }
        WienerPath out;
        for (std::size_t i = 0; i < size(); i += factor) {
            out.times.push_back(times[i]);
            out.values.push_back(values[i]);
        }
        return out;
    }

    /// The reflected path -W.
    WienerPath negated() const {
        WienerPath out = *this;
        for (double& v : out.values) v = -v;
        return out;
    }
};

/// Samples W on `times` (strictly increasing, starting at 0) with
/// independent N(0, dt) increments drawn from a 64-bit Mersenne twister
/// seeded with `seed`.
inline WienerPath generate_wiener(std::span<const double> times, std::uint64_t seed) {
    if (times.empty()) {
        throw ValidationError("Wiener path needs a nonempty grid");
    }
    if (times.front() != 0.0) {
        throw ValidationError("Wiener path grid must start at 0");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) {
            throw ValidationError("Wiener path grid must be strictly increasing");
        }
    }
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    WienerPath path;
    path.times.assign(times.begin(), times.end());
    path.values.resize(times.size());
    path.values[0] = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i) {
        path.values[i] = path.values[i - 1] + std::sqrt(times[i] - times[i - 1]) * normal(engine);
    }
    return path;
}

inline WienerPath generate_wiener(const Grid& grid, std::uint64_t seed) {
    const auto ts = grid.times();
    return generate_wiener(ts, seed);
}

/// E[W_t^k]: zero for odd k, (k-1)!! t^(k/2) for even k.
inline double wiener_moment(unsigned k, double t) {
    if (t < 0.0) {
        throw ValidationError("wiener_moment needs t >= 0");
    }
    if (k % 2 == 1) return 0.0;
    // k! / (2^(k/2) (k/2)!) = (k-1)!!
    double dfact = 1.0;
    for (unsigned i = k; i > 1; i -= 2) dfact *= static_cast<double>(i - 1);
    return dfact * std::pow(t, static_cast<double>(k) / 2.0);
}

/// Which normalisation of the Gaussian product-moment formulas to use.
enum class KernelMode {
    Corrected,     ///< agrees with direct Gaussian integration
    PaperLiteral,  ///< unscaled correlation kernels, kept for comparison
};

inline std::string_view to_string(KernelMode mode) {
    return mode == KernelMode::Corrected ? "corrected" : "paper";
}

inline KernelMode parse_kernel_mode(std::string_view s) {
    if (s == "corrected") return KernelMode::Corrected;
    if (s == "paper") return KernelMode::PaperLiteral;
    throw ValidationError("unknown kernel mode '" + std::string(s) + "' (corrected|paper)");
}

namespace detail {

inline double factorial(unsigned n) { return std::tgamma(static_cast<double>(n) + 1.0); }

}  // namespace detail

/// E[Z1^s1 Z2^s2] for a zero-mean bivariate normal with standard
/// deviations sd1, sd2 and correlation rho.
///
///   even s1, s2:  sd1^s1 sd2^s2 s1! s2! / 2^((s1+s2)/2)
///                 * sum_j (2 rho)^(2j) / ((2j)! (s1/2 - j)! (s2/2 - j)!)
///   odd s1, s2:   same prefactor with the odd-power sum
///                 sum_j (2 rho)^(2j+1) / ((2j+1)! ((s1-1)/2 - j)! ((s2-1)/2 - j)!)
///
/// PaperLiteral divides the odd case by 2^((s1+s2-2)/2) instead, which
/// doubles it (E[Z1 Z2] would come out as 2 rho sd1 sd2).
inline double gaussian_product_moment(unsigned s1, unsigned s2, double sd1, double sd2, double rho,
                                      KernelMode mode = KernelMode::Corrected) {
    if (!(sd1 > 0.0) || !(sd2 > 0.0) || std::fabs(rho) > 1.0) {
        throw ValidationError("need sd1, sd2 > 0 and |rho| <= 1");
    }
    if ((s1 + s2) % 2 == 1) return 0.0;
    using detail::factorial;
    const double scale = std::pow(sd1, s1) * std::pow(sd2, s2) * factorial(s1) * factorial(s2);
    double sum = 0.0;
    if (s1 % 2 == 0) {
        const unsigned top = std::min(s1, s2) / 2;
        for (unsigned j = 0; j <= top; ++j) {
            sum += std::pow(2.0 * rho, 2.0 * j) /
                   (factorial(2 * j) * factorial(s1 / 2 - j) * factorial(s2 / 2 - j));
        }
        return scale / std::pow(2.0, (s1 + s2) / 2.0) * sum;
    }
    const unsigned top = std::min(s1 - 1, s2 - 1) / 2;
    for (unsigned j = 0; j <= top; ++j) {
        sum += std::pow(2.0 * rho, 2.0 * j + 1.0) /
               (factorial(2 * j + 1) * factorial((s1 - 1) / 2 - j) * factorial((s2 - 1) / 2 - j));
    }
    const double exponent = mode == KernelMode::Corrected ? (s1 + s2) / 2.0 : (s1 + s2 - 2) / 2.0;
    return scale / std::pow(2.0, exponent) * sum;
}

/// The correlation-only kernel E_m(s, u): a function of
/// rho = min(s, u) / sqrt(s u) alone, without the (s u)^(m/2) scale.
/// At s = 0 or u = 0 the s -> 0 limit rho = 0 is used.
inline double correlation_kernel(unsigned m, double s, double u) {
    if (s < 0.0 || u < 0.0) throw ValidationError("correlation_kernel needs s, u >= 0");
    const double rho = (s == 0.0 || u == 0.0) ? 0.0 : std::min(s, u) / std::sqrt(s * u);
    using detail::factorial;
    const double pre = factorial(m) * factorial(m) / std::pow(2.0, m);
    double sum = 0.0;
    if (m % 2 == 0) {
        for (unsigned j = 0; j <= m / 2; ++j) {
            const double f = factorial(m / 2 - j);
            sum += std::pow(2.0 * rho, 2.0 * j) / (factorial(2 * j) * f * f);
        }
    } else {
        for (unsigned j = 0; j <= (m - 1) / 2; ++j) {
            const double f = factorial((m - 1) / 2 - j);
            sum += std::pow(2.0 * rho, 2.0 * j + 1.0) / (factorial(2 * j + 1) * f * f);
        }
    }
    return pre * sum;
}

namespace detail {

/// E[W_s^m W_u^m] including the s, u = 0 boundary, where it vanishes.
inline double wiener_product_kernel(unsigned m, double s, double u) {
    if (s == 0.0 || u == 0.0) return 0.0;
    return std::pow(s * u, m / 2.0) * correlation_kernel(m, s, u);
}

}  // namespace detail

/// E[W_s^m W_u^m] = (s u)^(m/2) E_m(s, u).
inline double wiener_product_moment(unsigned m, double s, double u) {
    if (m < 1) throw ValidationError("wiener_product_moment needs m >= 1");
    if (!(s > 0.0) || !(u > 0.0)) {
        throw ValidationError("wiener_product_moment needs s, u > 0");
    }
    return detail::wiener_product_kernel(m, s, u);
}

}  // namespace negrate
