#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "kernels.hpp"
#include "model.hpp"
#include "numerics.hpp"

namespace negrate {

/// |state| beyond this (or a non-finite state) terminates a path as a blow-up.
inline constexpr double blow_up_threshold = 1e12;

/// Coefficients sampled once on a time grid and shared by every path.
struct CoefficientSamples {
    std::vector<double> a, b, c, sigma, dsigma;

    CoefficientSamples(const ModelSpec& spec, std::span<const double> times) {
        const std::size_t n = times.size();
        a.resize(n);
        b.resize(n);
        c.resize(n);
        sigma.resize(n);
        dsigma.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = times[i];
            a[i] = spec.a(t);
            b[i] = spec.b(t);
            c[i] = spec.c(t);
            sigma[i] = spec.sigma(t);
            dsigma[i] = spec.sigma.derivative(t);
        }
    }
};

/// Coupled trajectories: the rate and either the force p or the
/// transformed force z.
struct PathPair {
    enum class Second { Force, Transformed };

    std::vector<double> times;
    std::vector<double> r;
    std::vector<double> second;
    Second kind = Second::Force;
};

namespace detail {

inline void check_state(std::size_t step, double r, double other) {
    if (!std::isfinite(r) || !std::isfinite(other) || std::fabs(r) > blow_up_threshold ||
        std::fabs(other) > blow_up_threshold) {
        throw PathFailure(PathFailure::Kind::BlowUp, step, "blow-up detected");
    }
}

/// Runs `body(i)` for every step, converting a power-domain error into a
/// PathFailure tagged with the step index.
template <class Body>
void step_loop(std::size_t steps, Body&& body) {
    std::size_t i = 0;
    try {
        for (; i < steps; ++i) body(i);
    } catch (const DomainError& e) {
        throw PathFailure(PathFailure::Kind::Domain, i, e.what());
    }
}

}  // namespace detail

/// Explicit Euler-Maruyama on the primal system with left-point coefficients:
///   r+ = r + c p^m dt
///   p+ = p + [a p^l + b r^n] dt + sigma r^k dW
inline PathPair simulate_primal(const ModelSpec& spec, const InitialConditions& ic, const WienerPath& w,
                                const CoefficientSamples& coef) {
    const std::size_t n = w.size();
    if (n < 2 || coef.c.size() != n) {
        throw ValidationError("Wiener path and coefficient samples must share a grid of >= 2 nodes");
    }
    const PowerMode mode = spec.power_mode;
    PathPair out;
    out.times = w.times;
    out.kind = PathPair::Second::Force;
    out.r.resize(n);
    out.second.resize(n);
    out.r[0] = ic.A;
    out.second[0] = ic.p0;
    detail::step_loop(n - 1, [&](std::size_t i) {
        const double dt = w.times[i + 1] - w.times[i];
        const double r = out.r[i];
        const double p = out.second[i];
        double drift_p = 0.0;
        if (coef.a[i] != 0.0) drift_p += coef.a[i] * power(p, spec.l, mode);
        if (coef.b[i] != 0.0) drift_p += coef.b[i] * power(r, spec.n, mode);
        const double r_next = r + coef.c[i] * power(p, spec.m, mode) * dt;
        const double p_next = p + drift_p * dt + coef.sigma[i] * power(r, spec.k, mode) * w.increment(i);
        detail::check_state(i + 1, r_next, p_next);
        out.r[i + 1] = r_next;
        out.second[i + 1] = p_next;
    });
    return out;
}

inline PathPair simulate_primal(const ModelSpec& spec, const InitialConditions& ic, const WienerPath& w) {
    return simulate_primal(spec, ic, w, CoefficientSamples(spec, w.times));
}

/// Explicit Euler on the noise-free transformed system, with
/// u = z + W - t/2:
///   dr = c sigma^m r^(km) u^m dt
///   dz = [1/2 - (sigma'/sigma) u - k c sigma^m u^(m+1) r^(mk-1)
///         + a sigma^(l-1) u^l r^(k(l-1)) + (b/sigma) r^(n-k)] dt
inline PathPair simulate_transformed(const ModelSpec& spec, const InitialConditions& ic, const WienerPath& w,
                                     const CoefficientSamples& coef) {
    const std::size_t n = w.size();
    if (n < 2 || coef.c.size() != n) {
        throw ValidationError("Wiener path and coefficient samples must share a grid of >= 2 nodes");
    }
    const PowerMode mode = spec.power_mode;
    const RationalExponent one{1};
    const RationalExponent km = spec.k * spec.m;
    const RationalExponent km_minus_1 = km - one;
    const RationalExponent m_plus_1 = spec.m + one;
    const RationalExponent l_minus_1 = spec.l - one;
    const RationalExponent k_l_minus_1 = spec.k * l_minus_1;
    const RationalExponent n_minus_k = spec.n - spec.k;
    const double m_val = spec.m.value();
    const double l1_val = l_minus_1.value();

    PathPair out;
    out.times = w.times;
    out.kind = PathPair::Second::Transformed;
    out.r.resize(n);
    out.second.resize(n);
    out.r[0] = ic.A;
    out.second[0] = ic.z0;
    detail::step_loop(n - 1, [&](std::size_t i) {
        const double t = w.times[i];
        const double dt = w.times[i + 1] - t;
        const double sig = coef.sigma[i];
        if (!(sig > 0.0)) {
            throw ValidationError("sigma must stay positive, got " + detail::format_double(sig) +
                                  " at t=" + detail::format_double(t));
        }
        const double r = out.r[i];
        const double z = out.second[i];
        const double u = z + w.values[i] - 0.5 * t;
        const double sig_m = std::pow(sig, m_val);

        const double dr = coef.c[i] * sig_m * power(r, km, mode) * power(u, spec.m, mode);
        double dz = 0.5 - coef.dsigma[i] / sig * u;
        if (!spec.k.is_zero() && coef.c[i] != 0.0) {
            dz -= spec.k.value() * coef.c[i] * sig_m * power(u, m_plus_1, mode) * power(r, km_minus_1, mode);
        }
        if (coef.a[i] != 0.0) {
            dz += coef.a[i] * std::pow(sig, l1_val) * power(u, spec.l, mode) * power(r, k_l_minus_1, mode);
        }
        if (coef.b[i] != 0.0) {
            dz += coef.b[i] / sig * power(r, n_minus_k, mode);
        }
        const double r_next = r + dr * dt;
        const double z_next = z + dz * dt;
        detail::check_state(i + 1, r_next, z_next);
        out.r[i + 1] = r_next;
        out.second[i + 1] = z_next;
    });
    return out;
}

inline PathPair simulate_transformed(const ModelSpec& spec, const InitialConditions& ic, const WienerPath& w) {
    return simulate_transformed(spec, ic, w, CoefficientSamples(spec, w.times));
}

/// Inverts the transformation: p = sigma(t) r^k (z + W_t - t/2).
inline double recover_p(double z, double r, double t, double w_t, const ModelSpec& spec) {
    const double sig = spec.sigma(t);
    if (!(sig > 0.0)) {
        throw ValidationError("recover_p needs sigma(t) > 0");
    }
    return sig * power(r, spec.k, spec.power_mode) * (z + w_t - 0.5 * t);
}

/// Force trajectory of a transformed run.
inline std::vector<double> recover_p(const PathPair& transformed, const WienerPath& w, const ModelSpec& spec) {
    if (transformed.kind != PathPair::Second::Transformed) {
        throw ValidationError("recover_p needs a transformed (r, z) path");
    }
    std::vector<double> p(transformed.r.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = recover_p(transformed.second[i], transformed.r[i], transformed.times[i], w.values[i], spec);
    }
    return p;
}

/// How a single rate path behaves relative to zero.
struct PathNegativity {
    bool ever_negative = false;
    double fraction_below = 0.0;               ///< share of grid steps with r < 0
    std::optional<double> first_passage;       ///< first grid time with r < 0
};

inline PathNegativity summarize_negativity(std::span<const double> times, std::span<const double> r) {
    PathNegativity out;
    if (r.size() < 2) return out;
    std::size_t below = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i] < 0.0) {
            if (!out.first_passage) out.first_passage = times[i];
            if (i > 0) ++below;
        }
    }
    out.ever_negative = out.first_passage.has_value();
    out.fraction_below = static_cast<double>(below) / static_cast<double>(r.size() - 1);
    return out;
}

inline constexpr std::array<double, 5> quantile_levels{0.05, 0.25, 0.5, 0.75, 0.95};

/// Linear-interpolation quantile of sorted data.
inline double sorted_quantile(std::span<const double> sorted, double level) {
    if (sorted.empty()) throw ValidationError("quantile of empty sample");
    const double h = level * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

struct NegativeRateStats {
    std::size_t n_paths = 0;
    std::size_t n_crossing = 0;
    double ever_negative_fraction = 0.0;
    double mean_time_below_zero_fraction = 0.0;
    /// At quantile_levels, over crossing paths only; empty if none cross.
    std::vector<double> first_passage_quantiles;
};

inline NegativeRateStats negative_rate_stats(std::span<const PathNegativity> paths) {
    NegativeRateStats out;
    out.n_paths = paths.size();
    if (paths.empty()) return out;
    std::vector<double> fractions, passages;
    fractions.reserve(paths.size());
    for (const auto& p : paths) {
        fractions.push_back(p.fraction_below);
        if (p.ever_negative) passages.push_back(*p.first_passage);
    }
    out.n_crossing = passages.size();
    const double n = static_cast<double>(paths.size());
    out.ever_negative_fraction = static_cast<double>(passages.size()) / n;
    out.mean_time_below_zero_fraction = numerics::pairwise_sum(fractions) / n;
    if (!passages.empty()) {
        std::sort(passages.begin(), passages.end());
        for (double level : quantile_levels) out.first_passage_quantiles.push_back(sorted_quantile(passages, level));
    }
    return out;
}

/// Negative-rate diagnostics from raw rate trajectories on a shared grid.
inline NegativeRateStats negative_rate_stats(std::span<const double> times,
                                             const std::vector<std::vector<double>>& paths) {
    std::vector<PathNegativity> summaries;
    summaries.reserve(paths.size());
    for (const auto& r : paths) summaries.push_back(summarize_negativity(times, r));
    return negative_rate_stats(summaries);
}

struct EnsembleOptions {
    unsigned threads = 1;           ///< 0 selects std::thread::hardware_concurrency()
    std::size_t output_stride = 1;  ///< statistics every stride-th grid node (the last node always)
    std::size_t retain = 0;         ///< number of surviving paths kept at output resolution
};

struct EnsembleStats {
    std::vector<double> times;
    std::vector<double> mean;
    std::vector<double> variance;                    ///< unbiased
    std::vector<double> fourth_central_moment;
    std::array<std::vector<double>, 5> quantiles;    ///< at quantile_levels
    std::size_t n_paths = 0;
    std::size_t n_survived = 0;
    std::size_t n_blow_up = 0;
    std::size_t n_domain = 0;
    std::uint64_t master_seed = 0;
    bool well_posedness_warning = false;
    std::vector<std::vector<double>> retained;
    std::vector<std::size_t> retained_index;
    NegativeRateStats negative;

    std::size_t n_excluded() const noexcept { return n_blow_up + n_domain; }
    double standard_error(std::size_t i) const {
        return std::sqrt(variance[i] / static_cast<double>(n_survived));
    }
    /// Standard error of the unbiased variance estimator.
    double variance_standard_error(std::size_t i) const {
        const double n = static_cast<double>(n_survived);
        if (n_survived < 4) return std::numeric_limits<double>::infinity();
        const double s2 = variance[i];
        return std::sqrt(std::max(0.0, (fourth_central_moment[i] - s2 * s2 * (n - 3.0) / (n - 1.0)) / n));
    }
    /// Index of the output time closest to t.
    std::size_t index_of(double t) const {
        auto it = std::lower_bound(times.begin(), times.end(), t);
        if (it == times.end()) return times.size() - 1;
        std::size_t i = static_cast<std::size_t>(it - times.begin());
        if (i > 0 && std::fabs(times[i - 1] - t) < std::fabs(times[i] - t)) --i;
        return i;
    }
};

/// Simulates one rate trajectory on the full grid from a Wiener path.
using PathSimulator = std::function<std::vector<double>(const WienerPath&)>;

/// Indices of the grid nodes at which statistics are reported.
inline std::vector<std::size_t> output_indices(const Grid& grid, std::size_t stride) {
    if (stride < 1) throw ValidationError("output stride must be >= 1");
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < grid.size(); i += stride) idx.push_back(i);
    if (idx.back() != grid.steps()) idx.push_back(grid.steps());
    return idx;
}

/// Runs n_paths independent paths; path i is driven by the Wiener path
/// generated from path_seed(master_seed, i). Results depend only on
/// (simulator, grid, n_paths, master_seed, output_stride), never on the
/// thread count or scheduling. Paths that throw PathFailure are excluded
/// and counted.
inline EnsembleStats run_ensemble(const PathSimulator& simulate, const Grid& grid, std::size_t n_paths,
                                  std::uint64_t master_seed, const EnsembleOptions& options = {}) {
    if (n_paths < 1) throw ValidationError("ensemble needs at least one path");
    const auto out_idx = output_indices(grid, options.output_stride);
    const std::size_t n_out = out_idx.size();
    const auto times = grid.times();

    std::vector<double> table(n_paths * n_out);
    std::vector<PathNegativity> negativity(n_paths);
    enum class Status : unsigned char { Ok, BlowUp, Domain };
    std::vector<Status> status(n_paths, Status::Ok);

    std::atomic<std::size_t> next{0};
    std::exception_ptr fatal;
    std::mutex fatal_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n_paths) return;
            try {
                const auto w = generate_wiener(times, path_seed(master_seed, i));
                const auto r = simulate(w);
                if (r.size() != times.size()) {
                    throw ValidationError("path simulator returned a trajectory of the wrong length");
                }
                for (std::size_t j = 0; j < n_out; ++j) table[i * n_out + j] = r[out_idx[j]];
                negativity[i] = summarize_negativity(times, r);
            } catch (const PathFailure& f) {
                status[i] = f.kind() == PathFailure::Kind::BlowUp ? Status::BlowUp : Status::Domain;
            } catch (...) {
                std::lock_guard lock(fatal_mutex);
                if (!fatal) fatal = std::current_exception();
                next.store(n_paths);
                return;
            }
        }
    };
    unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_paths));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (fatal) std::rethrow_exception(fatal);

    EnsembleStats stats;
    stats.n_paths = n_paths;
    stats.master_seed = master_seed;
    std::vector<std::size_t> survivors;
    for (std::size_t i = 0; i < n_paths; ++i) {
        switch (status[i]) {
            case Status::Ok: survivors.push_back(i); break;
            case Status::BlowUp: ++stats.n_blow_up; break;
            case Status::Domain: ++stats.n_domain; break;
        }
    }
    stats.n_survived = survivors.size();
    if (survivors.empty()) {
        throw NumericalError("all " + std::to_string(n_paths) + " paths failed (blow-up or domain error)");
    }
    for (std::size_t j : out_idx) stats.times.push_back(times[j]);
    stats.mean.resize(n_out);
    stats.variance.resize(n_out);
    stats.fourth_central_moment.resize(n_out);
    for (auto& q : stats.quantiles) q.resize(n_out);

    const std::size_t ns = survivors.size();
    std::vector<double> column(ns), dev(ns);
    for (std::size_t j = 0; j < n_out; ++j) {
        for (std::size_t s = 0; s < ns; ++s) column[s] = table[survivors[s] * n_out + j];
        // shifted by the first sample so a degenerate column comes out exact
        const double shift = column[0];
        for (std::size_t s = 0; s < ns; ++s) dev[s] = column[s] - shift;
        const double mean = shift + numerics::pairwise_sum(dev) / static_cast<double>(ns);
        for (std::size_t s = 0; s < ns; ++s) dev[s] = (column[s] - mean) * (column[s] - mean);
        const double ss = numerics::pairwise_sum(dev);
        for (std::size_t s = 0; s < ns; ++s) dev[s] *= dev[s];
        stats.mean[j] = mean;
        stats.variance[j] = ns > 1 ? ss / static_cast<double>(ns - 1) : 0.0;
        stats.fourth_central_moment[j] = numerics::pairwise_sum(dev) / static_cast<double>(ns);
        std::sort(column.begin(), column.end());
        for (std::size_t q = 0; q < quantile_levels.size(); ++q) {
            stats.quantiles[q][j] = sorted_quantile(column, quantile_levels[q]);
        }
    }
    const std::size_t keep = std::min(options.retain, ns);
    for (std::size_t s = 0; s < keep; ++s) {
        const std::size_t i = survivors[s];
        stats.retained.emplace_back(table.begin() + static_cast<std::ptrdiff_t>(i * n_out),
                                    table.begin() + static_cast<std::ptrdiff_t>((i + 1) * n_out));
        stats.retained_index.push_back(i);
    }
    std::vector<PathNegativity> surviving_negativity;
    surviving_negativity.reserve(ns);
    for (std::size_t i : survivors) surviving_negativity.push_back(negativity[i]);
    stats.negative = negative_rate_stats(surviving_negativity);
    return stats;
}

/// Ensemble of the primal system.
inline EnsembleStats run_ensemble(const ModelSpec& spec, const InitialConditions& ic, const Grid& grid,
                                  std::size_t n_paths, std::uint64_t master_seed,
                                  const EnsembleOptions& options = {}) {
    const auto times = grid.times();
    const CoefficientSamples coef(spec, times);
    PathSimulator sim = [&](const WienerPath& w) { return simulate_primal(spec, ic, w, coef).r; };
    auto stats = run_ensemble(sim, grid, n_paths, master_seed, options);
    stats.well_posedness_warning = !check_well_posedness(spec).guaranteed();
    return stats;
}

}  // namespace negrate
