#pragma once

#include "dsk/sequence.hpp"
#include "dsk/types.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace dsk {

/// Closed-form exponent sequence: omega * log(n) or slope * n.
struct ExponentRule {
    enum class Kind { log, linear };

    Kind kind = Kind::log;
    double param = 1.0;

    static ExponentRule log_scaled(double omega) { return {Kind::log, omega}; }
    static ExponentRule linear(double slope) { return {Kind::linear, slope}; }

    double operator()(long n) const {
        const double x = static_cast<double>(n);
        return kind == Kind::log ? param * std::log(x) : param * x;
    }

    /// limsup log(n) / lambda_n.
    double log_ratio_limsup() const { return kind == Kind::log ? 1.0 / param : 0.0; }
};

/// sum_n a_n exp(-lambda_n s), stored as a finite prefix plus optional closed-form rules.
///
/// Exponents come from `exponents` for n <= exponents.size() and from `exponent_rule`
/// beyond. When `open_tail` is set the coefficient prefix is a truncation of an infinite
/// series whose remaining coefficients are only known through `envelope`.
struct GeneralDirichletSeries {
    Sequence coefficients;
    std::vector<double> exponents;
    std::optional<ExponentRule> exponent_rule;
    std::optional<GrowthEnvelope> envelope;
    std::optional<double> abscissa;
    bool open_tail = false;

    long explicit_exponents() const noexcept { return static_cast<long>(exponents.size()); }

    double exponent(long n) const {
        if (n >= 1 && n <= explicit_exponents()) return exponents[static_cast<std::size_t>(n - 1)];
        if (!exponent_rule) throw error(errc::malformed_input, "exponent " + std::to_string(n) + " is not defined");
        return (*exponent_rule)(n);
    }

    /// Last index that can carry a nonzero coefficient (LONG_MAX for infinite series).
    long support_end() const noexcept { return open_tail ? LONG_MAX : coefficients.support_end(); }
    bool finite() const noexcept { return support_end() != LONG_MAX; }

    void validate() const {
        const long end = std::min<long>(support_end(), std::max<long>(explicit_exponents(), 64));
        if (!exponent_rule && explicit_exponents() < std::min(end, support_end())) {
            throw error(errc::malformed_input, "series has coefficients without exponents");
        }
        double prev = -kInf;
        for (long n = 1; n <= end; ++n) {
            const double l = exponent(n);
            if (!std::isfinite(l) || l < 0.0) throw error(errc::malformed_input, "exponents must be finite and non-negative");
            if (!(l > prev)) throw error(errc::malformed_input, "exponents must be strictly increasing");
            prev = l;
        }
        if (exponent_rule && !(exponent_rule->param > 0.0)) {
            throw error(errc::malformed_input, "exponent rule parameter must be positive");
        }
        if (open_tail && !exponent_rule) throw error(errc::malformed_input, "an open tail needs an exponent rule");
    }
};

/// sum_n fhat(n) n^{-s}.
struct OrdinaryDirichletSeries {
    Sequence coefficients;
    std::optional<GrowthEnvelope> envelope;
    bool open_tail = false;

    OrdinaryDirichletSeries() = default;
    explicit OrdinaryDirichletSeries(Sequence c) : coefficients(std::move(c)) {}
    explicit OrdinaryDirichletSeries(std::vector<complex> c) : coefficients(std::move(c)) {}

    complex coefficient(long n) const { return coefficients(n); }

    GeneralDirichletSeries general() const {
        GeneralDirichletSeries g;
        g.coefficients = coefficients;
        g.exponent_rule = ExponentRule::log_scaled(1.0);
        g.envelope = envelope;
        g.open_tail = open_tail;
        return g;
    }
};

namespace detail {

/// Upper bound on sum_{n=lo}^{hi} |a_n| exp(-lambda_n sigma).
inline double series_abs_sum(const GeneralDirichletSeries& f, long lo, long hi, double sigma) {
    lo = std::max(lo, 1L);
    hi = std::min(hi, f.support_end());
    if (hi < lo) return 0.0;
    double sum = 0.0;
    long n = lo;
    for (; n <= hi && n <= f.explicit_exponents(); ++n) {
        sum += std::abs(f.coefficients(n)) * std::exp(-f.exponent(n) * sigma);
    }
    sum *= 1.0 + 16.0 * kUnitRoundoff;
    if (n > hi) return sum;
    if (!f.exponent_rule) return kInf;
    const ExponentRule& rule = *f.exponent_rule;
    const double beta = rule.kind == ExponentRule::Kind::log ? rule.param * sigma : 0.0;
    const double w = rule.kind == ExponentRule::Kind::linear ? std::exp(-rule.param * sigma) : 1.0;
    const long known_end = std::min(hi, f.coefficients.support_end());
    if (n <= known_end) {
        sum += f.coefficients.abs_weighted_sum(n, known_end, beta, w);
        n = known_end == LONG_MAX ? LONG_MAX : known_end + 1;
    }
    if (n > hi || n == LONG_MAX) return sum;
    // Open tail: only the declared envelope is known.
    if (!f.envelope) return kInf;
    const GrowthEnvelope& e = *f.envelope;
    return sum + power_geometric_tail(e.C, e.alpha - beta, e.q * w, n);
}

} // namespace detail

/// Abscissa beyond which the tail bounds used by `evaluate` are finite.
inline double certified_abscissa(const GeneralDirichletSeries& f) {
    if (f.abscissa) return *f.abscissa;
    if (f.finite()) return -kInf;
    if (!f.exponent_rule) return kInf;
    GrowthEnvelope e = f.coefficients.tail_envelope();
    if (f.open_tail) {
        if (!f.envelope) return kInf;
        const GrowthEnvelope& u = *f.envelope;
        // The looser of the known-rule and declared envelopes governs convergence.
        if (f.coefficients.tail) {
            e.alpha = std::max(e.alpha, u.alpha);
            e.q = std::max(e.q, u.q);
        } else {
            e = u;
        }
    }
    const ExponentRule& rule = *f.exponent_rule;
    if (e.q > 1.0 && rule.kind == ExponentRule::Kind::log) return kInf;
    if (rule.kind == ExponentRule::Kind::log) {
        if (e.q < 1.0) return -kInf;
        return (e.alpha + 1.0) / rule.param;
    }
    // sum C n^alpha q^n e^{-c sigma n} converges iff q e^{-c sigma} < 1.
    return e.q > 0.0 ? std::log(e.q) / rule.param : -kInf;
}

/// Partial sum of the first `order` terms with a certified bound on the discarded tail.
inline ValueWithBound evaluate(const GeneralDirichletSeries& f, complex s, long order) {
    if (order < 1) throw error(errc::malformed_input, "order must be positive");
    const double sigma_a = certified_abscissa(f);
    if (!(s.real() > sigma_a)) {
        throw error(errc::outside_region, "not in certified convergence region: Re(s) = " + std::to_string(s.real()) +
                                              " <= abscissa " + std::to_string(sigma_a));
    }
    ValueWithBound out;
    const long last = std::min(order, f.support_end());
    double abs_sum = 0.0;
    double arg_weight = 0.0;
    for (long n = 1; n <= last; ++n) {
        const complex a = f.coefficients(n);
        if (a == complex{}) continue;
        const double lambda = f.exponent(n);
        const complex t = a * std::exp(-lambda * s);
        out.value += t;
        const double at = std::abs(t);
        abs_sum += at;
        arg_weight += at * (lambda * std::abs(s) + 6.0);
    }
    out.rounding = kUnitRoundoff * (arg_weight + static_cast<double>(std::max(last, 1L)) * abs_sum);
    out.error_radius = order >= f.support_end() ? 0.0 : detail::series_abs_sum(f, order + 1, LONG_MAX, s.real());
    return out;
}

inline ValueWithBound evaluate(const OrdinaryDirichletSeries& f, complex s, long order) {
    return evaluate(f.general(), s, order);
}

/// rho_conv + limsup log(n)/lambda_n, exact for rule-generated exponents.
inline double abscissa_upper_bound(const GeneralDirichletSeries& f, double rho_conv) {
    const long stored = f.explicit_exponents();
    for (long n = 2; n <= stored; ++n) {
        if (f.exponents[static_cast<std::size_t>(n - 1)] == 0.0) {
            throw error(errc::malformed_input, "malformed exponent sequence: lambda_" + std::to_string(n) + " = 0");
        }
    }
    if (f.exponent_rule) return rho_conv + f.exponent_rule->log_ratio_limsup();
    if (stored < 2) return rho_conv;
    // Supremum over the upper half of the prefix estimates the limsup.
    double sup = -kInf;
    for (long n = std::max(2L, stored / 2); n <= stored; ++n) {
        sup = std::max(sup, std::log(static_cast<double>(n)) / f.exponents[static_cast<std::size_t>(n - 1)]);
    }
    return rho_conv + sup;
}

/// Finite prefix of the first `order` terms.
inline GeneralDirichletSeries truncate(const GeneralDirichletSeries& f, long order) {
    GeneralDirichletSeries out;
    const long last = std::min(order, f.support_end());
    out.coefficients.head.reserve(static_cast<std::size_t>(std::max(last, 0L)));
    out.exponents.reserve(static_cast<std::size_t>(std::max(last, 0L)));
    for (long n = 1; n <= last; ++n) {
        out.coefficients.head.push_back(f.coefficients(n));
        out.exponents.push_back(f.exponent(n));
    }
    return out;
}

/// |fhat(n) - ghat(n)| <= tol for every stored index, missing entries read as zero.
inline bool series_equal(const OrdinaryDirichletSeries& f, const OrdinaryDirichletSeries& g, double tol,
                         long up_to = 0) {
    auto stored = [](const OrdinaryDirichletSeries& x) {
        const long e = x.coefficients.support_end();
        return e == LONG_MAX ? std::max(x.coefficients.head_size(), 1024L) : e;
    };
    const long n_max = up_to > 0 ? up_to : std::max(stored(f), stored(g));
    for (long n = 1; n <= n_max; ++n) {
        if (!(std::abs(f.coefficient(n) - g.coefficient(n)) <= tol)) return false;
    }
    return true;
}

} // namespace dsk
