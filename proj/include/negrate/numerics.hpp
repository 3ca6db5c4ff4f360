#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "errors.hpp"

namespace negrate::numerics {

/// Nodes and composite-trapezoid weights of a uniform grid on [lo, hi].
struct QuadGrid {
    std::vector<double> nodes;
    std::vector<double> weights;

    static QuadGrid uniform(double lo, double hi, std::size_t intervals) {
        if (intervals < 1 || !(hi > lo)) {
            throw ValidationError("quadrature grid needs hi > lo and >= 1 interval");
        }
        QuadGrid g;
        const double h = (hi - lo) / static_cast<double>(intervals);
        g.nodes.resize(intervals + 1);
        g.weights.assign(intervals + 1, h);
        for (std::size_t i = 0; i <= intervals; ++i) {
            g.nodes[i] = i == intervals ? hi : lo + static_cast<double>(i) * h;
        }
        g.weights.front() = g.weights.back() = h / 2.0;
        return g;
    }
};

/// Pairwise summation; the result depends only on the order of `xs`.
inline double pairwise_sum(std::span<const double> xs) {
    if (xs.size() <= 16) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const std::size_t half = xs.size() / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

/// Running trapezoid integral of samples on a uniform grid with step h.
/// out[0] = 0 and out[i] = integral from the first node to node i.
inline std::vector<double> cumtrapz(std::span<const double> values, double h) {
    if (values.size() < 2) {
        throw ValidationError("cumtrapz needs at least 2 nodes");
    }
    std::vector<double> out(values.size());
    out[0] = 0.0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        out[i] = out[i - 1] + 0.5 * h * (values[i - 1] + values[i]);
    }
    return out;
}

/// Running trapezoid integral on an arbitrary increasing grid.
inline std::vector<double> cumtrapz(std::span<const double> values, std::span<const double> times) {
    if (values.size() < 2 || values.size() != times.size()) {
        throw ValidationError("cumtrapz needs at least 2 nodes and matching times");
    }
    std::vector<double> out(values.size());
    out[0] = 0.0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        out[i] = out[i - 1] + 0.5 * (times[i] - times[i - 1]) * (values[i - 1] + values[i]);
    }
    return out;
}

inline double trapz(std::span<const double> values, double h) {
    return cumtrapz(values, h).back();
}

/// Tensor-product trapezoid of an n x n row-major table with spacing h on
/// both axes.
inline double double_trapz(std::span<const double> values, std::size_t n, double h) {
    if (n < 2 || values.size() != n * n) {
        throw ValidationError("double_trapz needs a square table with >= 2 nodes per axis");
    }
    std::vector<double> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        rows[i] = trapz(values.subspan(i * n, n), h);
    }
    return trapz(rows, h);
}

inline double double_trapz(const std::vector<std::vector<double>>& table, double h) {
    const std::size_t n = table.size();
    std::vector<double> flat;
    flat.reserve(n * n);
    for (const auto& row : table) {
        if (row.size() != n) {
            throw ValidationError("double_trapz needs a square table");
        }
        flat.insert(flat.end(), row.begin(), row.end());
    }
    return double_trapz(flat, n, h);
}

/// Tensor trapezoid of a symmetric kernel over every leading square
/// [t0, t_k]^2 of a uniform grid, in O(n^2) total work.
///
/// `kernel(i, j)` is only queried for j <= i. out[k] is the integral over
/// the first k+1 nodes on both axes; out[0] = 0.
template <class Kernel>
std::vector<double> cumulative_double_trapz(std::size_t n, double h, Kernel&& kernel) {
    if (n < 2) {
        throw ValidationError("cumulative_double_trapz needs >= 2 nodes");
    }
    std::vector<double> out(n, 0.0);
    std::vector<double> row(n);
    double full = 0.0;   // sum of f_ij over i, j <= k
    double row0 = 0.0;   // sum_j f_0j, j <= k
    double f00 = 0.0;
    std::vector<double> first_row(n);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j <= k; ++j) row[j] = kernel(k, j);
        first_row[k] = row[0];
        if (k == 0) f00 = row[0];
        const double fkk = row[k];
        double rowk = 0.0;  // sum_j f_kj, j <= k
        for (std::size_t j = 0; j <= k; ++j) rowk += row[j];
        full += 2.0 * (rowk - fkk) + fkk;
        row0 += first_row[k];
        if (k == 0) {
            out[k] = 0.0;
            continue;
        }
        const double corner = 0.25 * (f00 + 2.0 * first_row[k] + fkk);
        out[k] = h * h * (full - row0 - rowk + corner);
    }
    return out;
}

namespace detail {

/// log|(a)_j| and sign of the rising factorial; zero reports sign 0.
struct LogPochhammer {
    double log_abs = 0.0;
    int sign = 1;
};

inline LogPochhammer log_pochhammer(double a, std::size_t j) {
    LogPochhammer out;
    for (std::size_t i = 0; i < j; ++i) {
        const double f = a + static_cast<double>(i);
        if (f == 0.0) {
            return {0.0, 0};
        }
        out.log_abs += std::log(std::fabs(f));
        if (f < 0.0) out.sign = -out.sign;
    }
    return out;
}

inline std::optional<std::size_t> nonpositive_integer(double p) {
    if (p <= 0.0 && std::floor(p) == p) {
        return static_cast<std::size_t>(-p);
    }
    return std::nullopt;
}

}  // namespace detail

/// 3F1([p1, p2, p3]; [q1]; x) for parameter sets where some p is a
/// nonpositive integer, so the series is a finite Pochhammer sum.
inline double hypergeom_3f1_terminating(double p1, double p2, double p3, double q1, double x) {
    std::optional<std::size_t> last;
    for (double p : {p1, p2, p3}) {
        if (auto n = detail::nonpositive_integer(p); n && (!last || *n < *last)) last = n;
    }
    if (!last) {
        throw ValidationError("3F1 series does not terminate for the given parameters");
    }
    if (auto q = detail::nonpositive_integer(q1); q && *q < *last) {
        throw ValidationError("3F1 lower parameter hits a pole before the series terminates");
    }
    double sum = 1.0;
    if (x == 0.0) return sum;
    const double log_x = std::log(std::fabs(x));
    for (std::size_t j = 1; j <= *last; ++j) {
        const auto a = detail::log_pochhammer(p1, j);
        const auto b = detail::log_pochhammer(p2, j);
        const auto c = detail::log_pochhammer(p3, j);
        const auto d = detail::log_pochhammer(q1, j);
        const int sign = a.sign * b.sign * c.sign * d.sign * ((x < 0.0 && j % 2 == 1) ? -1 : 1);
        if (sign == 0) continue;
        const double log_term = a.log_abs + b.log_abs + c.log_abs - d.log_abs -
                                std::lgamma(static_cast<double>(j) + 1.0) + static_cast<double>(j) * log_x;
        sum += sign * std::exp(log_term);
    }
    return sum;
}

/// Gauss-Hermite rule for the weight exp(-x^2).
struct HermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Newton iteration on the orthonormal Hermite recurrence, stable well past
/// a hundred nodes.
inline HermiteRule gauss_hermite_rule(std::size_t n) {
    if (n < 1) throw ValidationError("Gauss-Hermite rule needs >= 1 node");
    constexpr double pim4 = 0.7511255444649425;  // pi^(-1/4)
    HermiteRule rule;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);
    const std::size_t half = (n + 1) / 2;
    const double nd = static_cast<double>(n);
    double z = 0.0;
    for (std::size_t i = 0; i < half; ++i) {
        if (i == 0) {
            z = std::sqrt(2.0 * nd + 1.0) - 1.85575 * std::pow(2.0 * nd + 1.0, -0.16667);
        } else if (i == 1) {
            z -= 1.14 * std::pow(nd, 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * rule.nodes[0];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * rule.nodes[1];
        } else {
            z = 2.0 * z - rule.nodes[i - 2];
        }
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = pim4;
            double p2 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                const double jd = static_cast<double>(j);
                p1 = z * std::sqrt(2.0 / (jd + 1.0)) * p2 - std::sqrt(jd / (jd + 1.0)) * p3;
            }
            pp = std::sqrt(2.0 * nd) * p2;
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::fabs(z - z1) <= 1e-15 * std::max(1.0, std::fabs(z))) break;
        }
        rule.nodes[i] = z;
        rule.nodes[n - 1 - i] = -z;
        rule.weights[i] = rule.weights[n - 1 - i] = 2.0 / (pp * pp);
    }
    return rule;
}

/// E[Z^k] for Z ~ N(0, sd^2) by Gauss-Hermite quadrature.
inline double gauss_hermite_moment(unsigned k, double sd, std::size_t nodes = 64) {
    const auto rule = gauss_hermite_rule(nodes);
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) {
        sum += rule.weights[i] * std::pow(std::numbers::sqrt2 * sd * rule.nodes[i], static_cast<int>(k));
    }
    return sum / std::sqrt(std::numbers::pi);
}

/// E[Z1^s1 Z2^s2] for a zero-mean bivariate normal, by tensorised
/// Gauss-Hermite quadrature after writing Z2 = rho (sd2/sd1) Z1 +
/// sqrt(1 - rho^2) sd2 xi with xi independent of Z1.
inline double gauss_hermite_2d_moment(unsigned s1, unsigned s2, double sd1, double sd2, double rho,
                                      std::size_t nodes = 64) {
    if (nodes < 64) {
        throw ValidationError("the 2-D Gauss-Hermite oracle uses at least 64 nodes per axis");
    }
    if (!(sd1 > 0.0) || !(sd2 > 0.0) || std::fabs(rho) > 1.0) {
        throw ValidationError("need sd1, sd2 > 0 and |rho| <= 1");
    }
    const auto rule = gauss_hermite_rule(nodes);
    const double scale = std::numbers::sqrt2;
    const int e1 = static_cast<int>(s1);
    const int e2 = static_cast<int>(s2);
    if (std::fabs(rho) == 1.0) {
        // Z2 is a deterministic multiple of Z1
        double sum = 0.0;
        for (std::size_t i = 0; i < nodes; ++i) {
            const double z1 = scale * sd1 * rule.nodes[i];
            sum += rule.weights[i] * std::pow(z1, e1) * std::pow(rho * sd2 / sd1 * z1, e2);
        }
        return sum / std::sqrt(std::numbers::pi);
    }
    const double resid = std::sqrt(1.0 - rho * rho) * sd2;
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) {
        const double z1 = scale * sd1 * rule.nodes[i];
        const double base = rho * sd2 / sd1 * z1;
        const double p1 = std::pow(z1, e1);
        double inner = 0.0;
        for (std::size_t j = 0; j < nodes; ++j) {
            inner += rule.weights[j] * std::pow(base + resid * scale * rule.nodes[j], e2);
        }
        sum += rule.weights[i] * p1 * inner;
    }
    return sum / std::numbers::pi;
}

}  // namespace negrate::numerics
