#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "errors.hpp"

namespace negrate {

namespace detail {

/// Shortest round-trippable text for a double (17 significant digits).
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw ValidationError("malformed number '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace detail

/// Time-dependent scalar coefficient of the model (a, b, c or sigma).
class CoefficientFn {
public:
    struct Constant {
        double value;
        bool operator==(const Constant&) const = default;
    };
    /// value * exp(-rate * t)
    struct ScaledExp {
        double value;
        double rate;
        bool operator==(const ScaledExp&) const = default;
    };
    /// value * cos(frequency * t)
    struct ScaledCos {
        double value;
        double frequency;
        bool operator==(const ScaledCos&) const = default;
    };
    /// cos(t) / (1 + t)
    struct DampedCos {
        bool operator==(const DampedCos&) const = default;
    };
    /// Piecewise-linear interpolation of (times, values).
    struct Tabulated {
        std::vector<double> times;
        std::vector<double> values;
        bool operator==(const Tabulated&) const = default;
    };

    using Variant = std::variant<Constant, ScaledExp, ScaledCos, DampedCos, Tabulated>;

    CoefficientFn() : fn_(Constant{0.0}) {}

    static CoefficientFn constant(double v) { return CoefficientFn(Constant{v}); }
    static CoefficientFn scaled_exp(double v, double rate) { return CoefficientFn(ScaledExp{v, rate}); }
    static CoefficientFn scaled_cos(double v, double freq) { return CoefficientFn(ScaledCos{v, freq}); }
    static CoefficientFn damped_cos() { return CoefficientFn(DampedCos{}); }
    static CoefficientFn tabulated(std::vector<double> times, std::vector<double> values);

    double operator()(double t) const;
    double derivative(double t) const;

    /// The value when the function is constant in time.
    std::optional<double> constant_value() const;
    bool is_identically_zero() const {
        auto v = constant_value();
        return v && *v == 0.0;
    }

    const Variant& variant() const noexcept { return fn_; }

    /// "const(v)", "scaled_exp(v, rate)", "scaled_cos(v, freq)", "damped_cos",
    /// "tabulated(t0 v0, t1 v1, ...)".
    std::string to_string() const;
    static CoefficientFn parse(std::string_view text);

    bool operator==(const CoefficientFn&) const = default;

private:
    explicit CoefficientFn(Variant fn) : fn_(std::move(fn)) {}

    Variant fn_;
};

inline CoefficientFn CoefficientFn::tabulated(std::vector<double> times, std::vector<double> values) {
    if (times.size() < 2 || times.size() != values.size()) {
        throw ValidationError("tabulated coefficient needs >= 2 (time, value) pairs");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) {
            throw ValidationError("tabulated coefficient grid must be strictly increasing");
        }
    }
    return CoefficientFn(Tabulated{std::move(times), std::move(values)});
}

namespace detail {

inline std::size_t locate_segment(const CoefficientFn::Tabulated& tab, double t) {
    const auto& ts = tab.times;
    if (t < ts.front() || t > ts.back()) {
        throw ValidationError("tabulated coefficient evaluated outside its grid at t=" + format_double(t));
    }
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    std::size_t hi = static_cast<std::size_t>(it - ts.begin());
    if (hi >= ts.size()) hi = ts.size() - 1;
    return hi - 1;
}

inline double interpolate(const CoefficientFn::Tabulated& tab, double t) {
    const std::size_t i = locate_segment(tab, t);
    const double w = (t - tab.times[i]) / (tab.times[i + 1] - tab.times[i]);
    return tab.values[i] + w * (tab.values[i + 1] - tab.values[i]);
}

}  // namespace detail

inline double CoefficientFn::operator()(double t) const {
    return std::visit(
        [t](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, Constant>) {
                return f.value;
            } else if constexpr (std::is_same_v<T, ScaledExp>) {
                return f.value * std::exp(-f.rate * t);
            } else if constexpr (std::is_same_v<T, ScaledCos>) {
                return f.value * std::cos(f.frequency * t);
            } else if constexpr (std::is_same_v<T, DampedCos>) {
                return std::cos(t) / (1.0 + t);
            } else {
                return detail::interpolate(f, t);
            }
        },
        fn_);
}

inline double CoefficientFn::derivative(double t) const {
    return std::visit(
        [t](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, Constant>) {
                return 0.0;
            } else if constexpr (std::is_same_v<T, ScaledExp>) {
                return -f.rate * f.value * std::exp(-f.rate * t);
            } else if constexpr (std::is_same_v<T, ScaledCos>) {
                return -f.frequency * f.value * std::sin(f.frequency * t);
            } else if constexpr (std::is_same_v<T, DampedCos>) {
                const double d = 1.0 + t;
                return -std::sin(t) / d - std::cos(t) / (d * d);
            } else {
                // central difference with the local grid spacing, clamped to the grid
                const std::size_t i = detail::locate_segment(f, t);
                const double h = f.times[i + 1] - f.times[i];
                const double lo = std::max(t - h, f.times.front());
                const double hi = std::min(t + h, f.times.back());
                return (detail::interpolate(f, hi) - detail::interpolate(f, lo)) / (hi - lo);
            }
        },
        fn_);
}

inline std::optional<double> CoefficientFn::constant_value() const {
    if (auto c = std::get_if<Constant>(&fn_)) return c->value;
    if (auto e = std::get_if<ScaledExp>(&fn_); e && (e->rate == 0.0 || e->value == 0.0)) return e->value;
    if (auto c = std::get_if<ScaledCos>(&fn_); c && (c->frequency == 0.0 || c->value == 0.0)) return c->value;
    return std::nullopt;
}

inline std::string CoefficientFn::to_string() const {
    using detail::format_double;
    return std::visit(
        [](const auto& f) -> std::string {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, Constant>) {
                return "const(" + format_double(f.value) + ")";
            } else if constexpr (std::is_same_v<T, ScaledExp>) {
                return "scaled_exp(" + format_double(f.value) + ", " + format_double(f.rate) + ")";
            } else if constexpr (std::is_same_v<T, ScaledCos>) {
                return "scaled_cos(" + format_double(f.value) + ", " + format_double(f.frequency) + ")";
            } else if constexpr (std::is_same_v<T, DampedCos>) {
                return "damped_cos";
            } else {
                std::string out = "tabulated(";
                for (std::size_t i = 0; i < f.times.size(); ++i) {
                    if (i) out += ", ";
                    out += format_double(f.times[i]) + " " + format_double(f.values[i]);
                }
                return out + ")";
            }
        },
        fn_);
}

inline CoefficientFn CoefficientFn::parse(std::string_view text) {
    auto trim = [](std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return s;
    };
    text = trim(text);
    const auto open = text.find('(');
    const std::string_view name = trim(text.substr(0, open));
    std::vector<std::string_view> args;
    if (open != std::string_view::npos) {
        if (text.back() != ')') {
            throw ValidationError("unterminated coefficient '" + std::string(text) + "'");
        }
        std::string_view body = text.substr(open + 1, text.size() - open - 2);
        while (!body.empty()) {
            const auto comma = body.find(',');
            args.push_back(trim(body.substr(0, comma)));
            if (comma == std::string_view::npos) break;
            body.remove_prefix(comma + 1);
        }
    }
    auto expect_args = [&](std::size_t n) {
        if (args.size() != n) {
            throw ValidationError("coefficient '" + std::string(name) + "' expects " +
                                  std::to_string(n) + " argument(s)");
        }
    };
    if (name == "const") {
        expect_args(1);
        return constant(detail::parse_double(args[0]));
    }
    if (name == "scaled_exp") {
        expect_args(2);
        return scaled_exp(detail::parse_double(args[0]), detail::parse_double(args[1]));
    }
    if (name == "scaled_cos") {
        expect_args(2);
        return scaled_cos(detail::parse_double(args[0]), detail::parse_double(args[1]));
    }
    if (name == "damped_cos") {
        if (!args.empty()) expect_args(0);
        return damped_cos();
    }
    if (name == "tabulated") {
        std::vector<double> ts, vs;
        for (auto pair : args) {
            const auto sp = pair.find(' ');
            if (sp == std::string_view::npos) {
                throw ValidationError("tabulated entries are 'time value' pairs");
            }
            ts.push_back(detail::parse_double(pair.substr(0, sp)));
            vs.push_back(detail::parse_double(pair.substr(sp + 1)));
        }
        return tabulated(std::move(ts), std::move(vs));
    }
    throw ValidationError("unknown coefficient function '" + std::string(text) + "'");
}

}  // namespace negrate
