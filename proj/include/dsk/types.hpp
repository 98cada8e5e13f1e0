#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dsk {

using complex = std::complex<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kUnitRoundoff = std::numeric_limits<double>::epsilon() / 2.0;

enum class errc {
    outside_region,
    malformed_input,
    collision,
    not_self_adjoint,
    recovery_diverged,
    hypothesis_failed,
    out_of_range,
    unknown_label,
    duplicate_offset,
    not_psd,
    uncertifiable,
    internal_check,
};

constexpr std::string_view to_string(errc code) {
    switch (code) {
    case errc::outside_region: return "outside_region";
    case errc::malformed_input: return "malformed_input";
    case errc::collision: return "collision";
    case errc::not_self_adjoint: return "not_self_adjoint";
    case errc::recovery_diverged: return "recovery_diverged";
    case errc::hypothesis_failed: return "hypothesis_failed";
    case errc::out_of_range: return "out_of_range";
    case errc::unknown_label: return "unknown_label";
    case errc::duplicate_offset: return "duplicate_offset";
    case errc::not_psd: return "not_psd";
    case errc::uncertifiable: return "uncertifiable";
    case errc::internal_check: return "internal_check";
    }
    return "unknown";
}

class error : public std::runtime_error {
public:
    error(errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    errc code() const noexcept { return code_; }

private:
    errc code_;
};

/// Open right half-plane {Re(s) > rho}.
struct HalfPlane {
    double rho = 0.0;

    bool contains(complex s) const noexcept { return s.real() > rho; }
};

/// A computed complex value together with a certified disc containing the exact quantity.
///
/// `error_radius` bounds the truncation error (the discarded tail) and is exactly zero
/// for finite sums. `rounding` is a separate a-priori allowance for floating-point error
/// in the partial sum; `total_radius()` is the radius of the certified disc.
struct ValueWithBound {
    complex value{};
    double error_radius = 0.0;
    double rounding = 0.0;

    double total_radius() const noexcept { return error_radius + rounding; }
    bool certified() const noexcept { return std::isfinite(error_radius); }
};

// Disc arithmetic used when combining certified values.
inline ValueWithBound operator*(const ValueWithBound& x, const ValueWithBound& y) {
    const double rx = x.total_radius();
    const double ry = y.total_radius();
    ValueWithBound out;
    out.value = x.value * y.value;
    out.error_radius = std::abs(x.value) * ry + std::abs(y.value) * rx + rx * ry;
    out.rounding = 4.0 * kUnitRoundoff * std::abs(out.value);
    return out;
}

inline ValueWithBound operator-(const ValueWithBound& x, const ValueWithBound& y) {
    ValueWithBound out;
    out.value = x.value - y.value;
    out.error_radius = x.error_radius + y.error_radius;
    out.rounding = x.rounding + y.rounding + kUnitRoundoff * std::abs(out.value);
    return out;
}

inline ValueWithBound conj(const ValueWithBound& x) {
    return {std::conj(x.value), x.error_radius, x.rounding};
}

/// Quotient of discs; refuses when the denominator disc contains zero.
inline ValueWithBound divide(const ValueWithBound& x, const ValueWithBound& y) {
    const double ry = y.total_radius();
    const double ay = std::abs(y.value);
    if (!(ay > ry)) {
        throw error(errc::hypothesis_failed, "denominator disc contains zero");
    }
    const double rx = x.total_radius();
    ValueWithBound out;
    out.value = x.value / y.value;
    out.error_radius = (std::abs(x.value) * ry + ay * rx) / (ay * (ay - ry));
    out.rounding = 4.0 * kUnitRoundoff * std::abs(out.value);
    return out;
}

/// n^{-s} for a positive integer n.
inline complex npow(double n, complex s) {
    return std::exp(-s * std::log(n));
}

} // namespace dsk
