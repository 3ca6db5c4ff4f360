#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "coefficient.hpp"
#include "errors.hpp"

namespace negrate {

/// Uniform time grid t_i = i * T / N on [0, T].
class Grid {
public:
    Grid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
        if (!(horizon > 0.0) || !std::isfinite(horizon)) {
            throw ValidationError("grid horizon must be positive and finite");
        }
        if (steps < 1) {
            throw ValidationError("grid needs at least one step");
        }
    }

    /// Grid with step dt; T / dt must be an integer up to rounding.
    static Grid from_step(double horizon, double dt) {
        if (!(dt > 0.0) || !std::isfinite(dt)) {
            throw ValidationError("time step must be positive, got " + detail::format_double(dt));
        }
        if (!(horizon > 0.0)) {
            throw ValidationError("grid horizon must be positive");
        }
        const double ratio = horizon / dt;
        const double steps = std::round(ratio);
        if (steps < 1.0 || std::fabs(ratio - steps) > 1e-9 * std::max(1.0, ratio)) {
            throw ValidationError("horizon " + detail::format_double(horizon) +
                                  " is not a whole number of steps of " + detail::format_double(dt));
        }
        return Grid(horizon, static_cast<std::size_t>(steps));
    }

    double horizon() const noexcept { return horizon_; }
    std::size_t steps() const noexcept { return steps_; }
    std::size_t size() const noexcept { return steps_ + 1; }
    double dt() const noexcept { return horizon_ / static_cast<double>(steps_); }
    double time(std::size_t i) const noexcept {
        return i == steps_ ? horizon_ : static_cast<double>(i) * dt();
    }
    std::vector<double> times() const {
        std::vector<double> ts(size());
        for (std::size_t i = 0; i < ts.size(); ++i) ts[i] = time(i);
        return ts;
    }

    /// Grid with `factor` times fewer steps over the same horizon.
    Grid coarsened(std::size_t factor) const {
        if (factor < 1 || steps_ % factor != 0) {
            throw ValidationError("coarsening factor must divide the step count");
        }
        return Grid(horizon_, steps_ / factor);
    }

    bool operator==(const Grid&) const = default;

private:
    double horizon_;
    std::size_t steps_;
};

}  // namespace negrate
