#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <string>
#include <string_view>

#include "errors.hpp"

namespace negrate {

/// Exponent p/q kept in lowest terms with q > 0.
///
/// Odd denominators give a real root for every argument; an even
/// denominator (e.g. 1/2) is accepted but only defined for nonnegative
/// arguments under PowerMode::OddRootReal.
class RationalExponent {
public:
    constexpr RationalExponent() = default;

    constexpr RationalExponent(std::int64_t numerator, std::int64_t denominator = 1)
        : num_(numerator), den_(denominator) {
        if (den_ == 0) {
            throw ValidationError("rational exponent with zero denominator");
        }
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        const std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }

    constexpr std::int64_t numerator() const noexcept { return num_; }
    constexpr std::int64_t denominator() const noexcept { return den_; }
    constexpr double value() const noexcept {
        return static_cast<double>(num_) / static_cast<double>(den_);
    }
    constexpr bool is_integer() const noexcept { return den_ == 1; }
    constexpr bool is_zero() const noexcept { return num_ == 0; }
    constexpr bool requires_even_root() const noexcept { return den_ % 2 == 0; }

    constexpr RationalExponent operator+(RationalExponent o) const {
        return {num_ * o.den_ + o.num_ * den_, den_ * o.den_};
    }
    constexpr RationalExponent operator-(RationalExponent o) const {
        return {num_ * o.den_ - o.num_ * den_, den_ * o.den_};
    }
    constexpr RationalExponent operator*(RationalExponent o) const {
        return {num_ * o.num_, den_ * o.den_};
    }
    constexpr RationalExponent reciprocal() const {
        if (num_ == 0) {
            throw DomainError("reciprocal of a zero exponent");
        }
        return {den_, num_};
    }

    constexpr bool operator==(const RationalExponent&) const = default;

    std::string to_string() const {
        return den_ == 1 ? std::to_string(num_)
                         : std::to_string(num_) + "/" + std::to_string(den_);
    }

    /// Accepts "p" or "p/q" with optional surrounding blanks.
    static RationalExponent parse(std::string_view text);

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

inline RationalExponent RationalExponent::parse(std::string_view text) {
    auto trim = [](std::string_view s) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
        return s;
    };
    auto to_int = [&](std::string_view s) -> std::int64_t {
        s = trim(s);
        std::string buf(s);
        char* end = nullptr;
        const long long v = std::strtoll(buf.c_str(), &end, 10);
        if (buf.empty() || end != buf.c_str() + buf.size()) {
            throw ValidationError("malformed rational exponent '" + std::string(text) + "'");
        }
        return v;
    };
    const auto slash = text.find('/');
    if (slash == std::string_view::npos) {
        return {to_int(text), 1};
    }
    return {to_int(text.substr(0, slash)), to_int(text.substr(slash + 1))};
}

/// How z^alpha is extended to negative z.
enum class PowerMode {
    OddRootReal,  ///< real odd root, then the integer power
    SignedPower,  ///< |z|^(alpha-1) * z
};

inline std::string_view to_string(PowerMode mode) {
    return mode == PowerMode::OddRootReal ? "oddroot" : "signed";
}

inline PowerMode parse_power_mode(std::string_view s) {
    if (s == "oddroot") return PowerMode::OddRootReal;
    if (s == "signed") return PowerMode::SignedPower;
    throw ValidationError("unknown power mode '" + std::string(s) + "' (oddroot|signed)");
}

namespace detail {

inline double ipow(double x, std::int64_t n) {
    const bool invert = n < 0;
    std::uint64_t e = invert ? static_cast<std::uint64_t>(-n) : static_cast<std::uint64_t>(n);
    double result = 1.0;
    while (e != 0) {
        if (e & 1u) result *= x;
        x *= x;
        e >>= 1u;
    }
    return invert ? 1.0 / result : result;
}

}  // namespace detail

/// z raised to a rational exponent under the chosen extension to z < 0.
///
/// A zero exponent yields 1 in both modes, so a vanishing exponent always
/// removes the factor. Throws DomainError for an even root of a negative
/// number (OddRootReal) and for 0 raised to a nonpositive power.
inline double power(double z, RationalExponent alpha, PowerMode mode = PowerMode::OddRootReal) {
    if (alpha.is_zero()) {
        return 1.0;
    }
    if (z == 0.0) {
        if (alpha.numerator() < 0) {
            throw DomainError("0 raised to negative exponent " + alpha.to_string());
        }
        return 0.0;
    }
    if (mode == PowerMode::SignedPower) {
        const double mag = std::fabs(z);
        const double scaled = alpha.is_integer()
                                  ? detail::ipow(mag, alpha.numerator() - 1)
                                  : std::pow(mag, alpha.value() - 1.0);
        return scaled * z;
    }
    if (alpha.is_integer()) {
        return detail::ipow(z, alpha.numerator());
    }
    if (z < 0.0) {
        if (alpha.requires_even_root()) {
            throw DomainError("even root of negative value " + std::to_string(z) +
                              " for exponent " + alpha.to_string());
        }
        const double mag = std::pow(-z, alpha.value());
        return (alpha.numerator() % 2 != 0) ? -mag : mag;
    }
    return std::pow(z, alpha.value());
}

}  // namespace negrate
