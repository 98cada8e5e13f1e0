#pragma once

#include "dsk/types.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <optional>
#include <vector>

namespace dsk {

/// |x_l| <= C * l^alpha * q^l for every index l in the range the envelope covers.
struct GrowthEnvelope {
    double C = 0.0;
    double alpha = 0.0;
    double q = 1.0;
};

/// Upper bound on sum_{n >= n0} C n^gamma q^n, or +inf when the bound cannot be certified.
inline double power_geometric_tail(double C, double gamma, double q, long n0) {
    if (C == 0.0 || q == 0.0) return 0.0;
    if (C < 0.0 || q < 0.0 || n0 < 1) return kInf;
    if (q > 1.0) return kInf;
    if (q == 1.0) {
        if (gamma >= -1.0) return kInf;
        // x^gamma is convex, so each term is at most its integral over [n - 1/2, n + 1/2].
        const double x0 = static_cast<double>(n0) - 0.5;
        return C * std::pow(x0, gamma + 1.0) / (-gamma - 1.0);
    }
    auto term = [&](long n) { return C * std::pow(static_cast<double>(n), gamma) * std::pow(q, static_cast<double>(n)); };
    if (gamma <= 0.0) {
        return term(n0) / (1.0 - q);
    }
    // Ratio (1 + 1/n)^gamma q decreases in n; sum explicitly until it drops below sqrt(q).
    const double target = std::sqrt(q);
    const double limit = std::pow(target / q, 1.0 / gamma) - 1.0;
    long n1 = n0;
    if (limit > 0.0) {
        n1 = std::max(n0, static_cast<long>(std::ceil(1.0 / limit)));
    }
    if (n1 - n0 > 10'000'000) return kInf;
    double head = 0.0;
    for (long n = n0; n < n1; ++n) head += term(n);
    const double ratio = std::pow(1.0 + 1.0 / static_cast<double>(n1), gamma) * q;
    return head + term(n1) / (1.0 - ratio);
}

/// Closed-form generator for a sequence indexed by l = 1, 2, ...
struct SequenceRule {
    enum class Kind { constant, geometric, power, list };

    Kind kind = Kind::list;
    complex scale{1.0, 0.0};
    double ratio = 1.0;    // geometric: scale * ratio^l
    double exponent = 0.0; // power: scale * l^exponent
    std::vector<complex> values;

    static SequenceRule constant(complex value) {
        SequenceRule r;
        r.kind = Kind::constant;
        r.scale = value;
        return r;
    }
    static SequenceRule geometric(complex scale, double ratio) {
        SequenceRule r;
        r.kind = Kind::geometric;
        r.scale = scale;
        r.ratio = ratio;
        return r;
    }
    static SequenceRule power(complex scale, double exponent) {
        SequenceRule r;
        r.kind = Kind::power;
        r.scale = scale;
        r.exponent = exponent;
        return r;
    }
    static SequenceRule list(std::vector<complex> values) {
        SequenceRule r;
        r.kind = Kind::list;
        r.values = std::move(values);
        return r;
    }

    complex operator()(long l) const {
        if (l < 1) return {};
        switch (kind) {
        case Kind::constant: return scale;
        case Kind::geometric: return scale * std::pow(ratio, static_cast<double>(l));
        case Kind::power: return scale * std::pow(static_cast<double>(l), exponent);
        case Kind::list:
            return static_cast<std::size_t>(l) <= values.size() ? values[static_cast<std::size_t>(l - 1)] : complex{};
        }
        return {};
    }

    bool finite() const noexcept { return kind == Kind::list || scale == complex{}; }

    long support_end() const noexcept {
        if (kind == Kind::list) return static_cast<long>(values.size());
        return scale == complex{} ? 0 : LONG_MAX;
    }

    GrowthEnvelope envelope() const {
        switch (kind) {
        case Kind::constant: return {std::abs(scale), 0.0, 1.0};
        case Kind::geometric: return {std::abs(scale), 0.0, std::abs(ratio)};
        case Kind::power: return {std::abs(scale), exponent, 1.0};
        case Kind::list: {
            double m = 0.0;
            for (const auto& v : values) m = std::max(m, std::abs(v));
            return {m, 0.0, 1.0};
        }
        }
        return {};
    }

    /// x_l >= D l^alpha q^l for a positive real sequence; nullopt if no such bound is known.
    std::optional<GrowthEnvelope> lower_envelope() const {
        if (scale.imag() != 0.0 && kind != Kind::list) return std::nullopt;
        switch (kind) {
        case Kind::constant:
            if (scale.real() > 0.0) return GrowthEnvelope{scale.real(), 0.0, 1.0};
            return std::nullopt;
        case Kind::geometric:
            if (scale.real() > 0.0 && ratio > 0.0) return GrowthEnvelope{scale.real(), 0.0, ratio};
            return std::nullopt;
        case Kind::power:
            if (scale.real() > 0.0) return GrowthEnvelope{scale.real(), exponent, 1.0};
            return std::nullopt;
        case Kind::list: {
            double m = kInf;
            for (const auto& v : values) {
                if (v.imag() != 0.0 || !(v.real() > 0.0)) return std::nullopt;
                m = std::min(m, v.real());
            }
            return GrowthEnvelope{values.empty() ? 0.0 : m, 0.0, 1.0};
        }
        }
        return std::nullopt;
    }
};

/// A sequence x_1, x_2, ... stored as an explicit head followed by an optional generated tail.
///
/// For i > head.size() the value is factor * rule(i - shift), conjugated when `conj` is set.
struct Sequence {
    std::vector<complex> head;
    std::optional<SequenceRule> tail;
    long shift = 0;
    complex factor{1.0, 0.0};
    bool conj = false;

    Sequence() = default;
    explicit Sequence(std::vector<complex> values) : head(std::move(values)) {}
    explicit Sequence(SequenceRule rule) : tail(std::move(rule)) {}

    static Sequence zero() { return Sequence{}; }

    long head_size() const noexcept { return static_cast<long>(head.size()); }

    complex operator()(long i) const {
        if (i < 1) return {};
        if (i <= head_size()) return head[static_cast<std::size_t>(i - 1)];
        if (!tail) return {};
        complex v = (*tail)(i - shift);
        if (conj) v = std::conj(v);
        return factor * v;
    }

    bool finite() const noexcept { return !tail || tail->finite() || factor == complex{}; }

    long support_end() const noexcept {
        if (!tail || factor == complex{}) return head_size();
        const long e = tail->support_end();
        if (e == LONG_MAX) return LONG_MAX;
        return std::max(head_size(), e + shift);
    }

    /// Envelope in the index i, valid for i > head_size().
    GrowthEnvelope tail_envelope() const {
        if (!tail) return {0.0, 0.0, 1.0};
        GrowthEnvelope e = tail->envelope();
        // l = i - shift with 1 <= l <= i and i <= (1 + shift) l.
        double c = std::abs(factor) * e.C;
        if (e.alpha < 0.0 && shift > 0) c *= std::pow(1.0 + static_cast<double>(shift), -e.alpha);
        if (e.q > 0.0 && shift != 0) c *= std::pow(e.q, -static_cast<double>(shift));
        return {c, e.alpha, e.q};
    }

    /// Upper bound on sum_{i=lo}^{hi} |x_i| i^{-beta} w^i (hi may be LONG_MAX).
    double abs_weighted_sum(long lo, long hi, double beta, double w = 1.0, long budget = 4096) const {
        lo = std::max(lo, 1L);
        hi = std::min(hi, support_end());
        if (hi < lo) return 0.0;
        auto weight = [&](long i) {
            const double x = static_cast<double>(i);
            return std::pow(x, -beta) * (w == 1.0 ? 1.0 : std::pow(w, x));
        };
        double sum = 0.0;
        long i = lo;
        // Finite supports are summed exactly; infinite ones up to a budget, then enveloped.
        const bool infinite = hi == LONG_MAX;
        const long explicit_end = infinite ? std::max(lo + budget - 1, head_size()) : hi;
        for (; i <= explicit_end && i <= hi; ++i) {
            sum += std::abs((*this)(i)) * weight(i);
        }
        sum *= 1.0 + 16.0 * kUnitRoundoff;
        if (i > hi) return sum;
        const GrowthEnvelope e = tail_envelope();
        return sum + power_geometric_tail(e.C, e.alpha - beta, e.q * w, i);
    }
};

} // namespace dsk
