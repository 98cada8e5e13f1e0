#pragma once

#include "dsk/types.hpp"

#include <charconv>
#include <compare>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>

namespace dsk {

/// Exact rational p/q with q > 0 and gcd(p, q) = 1; overflow raises out_of_range.
class Rational {
public:
    constexpr Rational() = default;
    Rational(std::int64_t p) : num_(p), den_(1) {}
    Rational(std::int64_t p, std::int64_t q) { assign(p, q); }

    std::int64_t num() const noexcept { return num_; }
    std::int64_t den() const noexcept { return den_; }
    double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
    bool is_zero() const noexcept { return num_ == 0; }

    /// Accepts "p", "p/q" and plain decimals such as "-1.25".
    static Rational parse(std::string_view text) {
        auto bad = [&] { return error(errc::malformed_input, "not a rational: '" + std::string(text) + "'"); };
        if (text.empty()) throw bad();
        if (const auto slash = text.find('/'); slash != std::string_view::npos) {
            return Rational(parse_int(text.substr(0, slash), bad), parse_int(text.substr(slash + 1), bad));
        }
        if (const auto dot = text.find('.'); dot != std::string_view::npos) {
            const std::string_view frac = text.substr(dot + 1);
            if (frac.empty() || frac.size() > 18) throw bad();
            std::string digits(text.substr(0, dot));
            digits += frac;
            if (digits == "-" || digits == "+") throw bad();
            std::int64_t scale = 1;
            for (std::size_t k = 0; k < frac.size(); ++k) scale *= 10;
            return Rational(parse_int(digits, bad), scale);
        }
        return Rational(parse_int(text, bad));
    }

    std::string str() const {
        return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
    }

    friend Rational operator+(const Rational& x, const Rational& y) {
        return make(static_cast<__int128>(x.num_) * y.den_ + static_cast<__int128>(y.num_) * x.den_,
                    static_cast<__int128>(x.den_) * y.den_);
    }
    friend Rational operator-(const Rational& x) { return make(-static_cast<__int128>(x.num_), x.den_); }
    friend Rational operator-(const Rational& x, const Rational& y) { return x + (-y); }
    friend Rational operator*(const Rational& x, const Rational& y) {
        return make(static_cast<__int128>(x.num_) * y.num_, static_cast<__int128>(x.den_) * y.den_);
    }
    friend bool operator==(const Rational& x, const Rational& y) = default;
    friend std::strong_ordering operator<=>(const Rational& x, const Rational& y) {
        const __int128 l = static_cast<__int128>(x.num_) * y.den_;
        const __int128 r = static_cast<__int128>(y.num_) * x.den_;
        return l < r ? std::strong_ordering::less : (l > r ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;

    template <class Bad>
    static std::int64_t parse_int(std::string_view s, Bad bad) {
        if (!s.empty() && s.front() == '+') s.remove_prefix(1);
        std::int64_t v = 0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) throw bad();
        return v;
    }

    static __int128 gcd128(__int128 a, __int128 b) {
        if (a < 0) a = -a;
        if (b < 0) b = -b;
        while (b != 0) {
            const __int128 t = a % b;
            a = b;
            b = t;
        }
        return a;
    }

    static Rational make(__int128 p, __int128 q) {
        if (q == 0) throw error(errc::malformed_input, "zero denominator");
        if (q < 0) {
            p = -p;
            q = -q;
        }
        const __int128 g = gcd128(p, q);
        if (g > 1) {
            p /= g;
            q /= g;
        }
        constexpr __int128 lo = INT64_MIN + 1, hi = INT64_MAX;
        if (p < lo || p > hi || q > hi) throw error(errc::out_of_range, "rational overflow");
        Rational r;
        r.num_ = static_cast<std::int64_t>(p);
        r.den_ = static_cast<std::int64_t>(q);
        return r;
    }

    void assign(std::int64_t p, std::int64_t q) { *this = make(p, q); }
};

/// x + iy with rational parts.
struct ExactComplex {
    Rational re, im;

    bool is_zero() const noexcept { return re.is_zero() && im.is_zero(); }
    complex to_complex() const { return {re.to_double(), im.to_double()}; }

    friend ExactComplex operator+(const ExactComplex& x, const ExactComplex& y) { return {x.re + y.re, x.im + y.im}; }
    friend ExactComplex operator-(const ExactComplex& x, const ExactComplex& y) { return {x.re - y.re, x.im - y.im}; }
    friend ExactComplex operator*(const ExactComplex& x, const ExactComplex& y) {
        return {x.re * y.re - x.im * y.im, x.re * y.im + x.im * y.re};
    }
    friend bool operator==(const ExactComplex& x, const ExactComplex& y) = default;

    /// i * t for a real rational t.
    static ExactComplex i_times(const Rational& t) { return {Rational{0}, t}; }
};

} // namespace dsk
