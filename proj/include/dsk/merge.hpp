#pragma once

#include "dsk/series.hpp"
#include "dsk/types.hpp"

#include <cmath>
#include <optional>
#include <queue>
#include <span>
#include <sstream>
#include <vector>

namespace dsk {

/// One entry nu = lambda_m + mu_n of a merged exponent sequence (indices are 1-based).
struct MergedTerm {
    double nu = 0.0;
    long m = 0;
    long n = 0;

    friend bool operator==(const MergedTerm&, const MergedTerm&) = default;
};

inline constexpr double kCollisionTolerance = 1e-12;

/// Lazily enumerates {lambda_m + mu_n} in ascending order by a k-way merge over n.
///
/// Both input sequences must be increasing; each column n contributes the increasing run
/// lambda_1 + mu_n, lambda_2 + mu_n, ... and a min-heap holds the head of every run.
class MergedExponentEnumerator {
public:
    MergedExponentEnumerator(std::span<const double> lambda, std::span<const double> mu)
        : lambda_(lambda), mu_(mu) {
        if (!lambda_.empty()) {
            for (std::size_t n = 0; n < mu_.size(); ++n) heap_.push({lambda_[0] + mu_[n], 0, n});
        }
    }

    std::optional<MergedTerm> next() {
        if (heap_.empty()) return std::nullopt;
        const Head top = heap_.top();
        heap_.pop();
        if (top.m + 1 < lambda_.size()) heap_.push({lambda_[top.m + 1] + mu_[top.n], top.m + 1, top.n});
        return MergedTerm{top.nu, static_cast<long>(top.m + 1), static_cast<long>(top.n + 1)};
    }

    bool done() const noexcept { return heap_.empty(); }

private:
    struct Head {
        double nu;
        std::size_t m;
        std::size_t n;
        // Ties broken by index so the enumeration order is deterministic.
        bool operator>(const Head& o) const {
            if (nu != o.nu) return nu > o.nu;
            if (m != o.m) return m > o.m;
            return n > o.n;
        }
    };

    std::span<const double> lambda_;
    std::span<const double> mu_;
    std::priority_queue<Head, std::vector<Head>, std::greater<>> heap_;
};

inline bool exponents_collide(double a, double b, double rel_tol = kCollisionTolerance) {
    const double scale = std::max({1.0, std::abs(a), std::abs(b)});
    return std::abs(a - b) <= rel_tol * scale;
}

/// All lambda_m + mu_n in ascending order; throws on two values within the collision tolerance.
inline std::vector<MergedTerm> merge_exponents(std::span<const double> lambda, std::span<const double> mu,
                                               double rel_tol = kCollisionTolerance) {
    std::vector<MergedTerm> out;
    out.reserve(lambda.size() * mu.size());
    MergedExponentEnumerator it(lambda, mu);
    while (auto t = it.next()) {
        if (!out.empty() && exponents_collide(out.back().nu, t->nu, rel_tol)) {
            std::ostringstream msg;
            msg << "collision - injectivity hypothesis violated numerically: (" << out.back().m << "," << out.back().n
                << ") and (" << t->m << "," << t->n << ") both give " << t->nu;
            throw error(errc::collision, msg.str());
        }
        out.push_back(*t);
    }
    return out;
}

/// Merged values log(m) + omega log(n) for m <= m_max, n <= n_max.
inline std::vector<MergedTerm> merge_log_exponents(double omega, long m_max, long n_max) {
    if (!(omega > 0.0)) throw error(errc::malformed_input, "omega must be positive");
    if (m_max < 1 || n_max < 1) throw error(errc::malformed_input, "grid sizes must be positive");
    std::vector<double> lambda(static_cast<std::size_t>(m_max));
    std::vector<double> mu(static_cast<std::size_t>(n_max));
    for (long m = 1; m <= m_max; ++m) lambda[static_cast<std::size_t>(m - 1)] = std::log(static_cast<double>(m));
    for (long n = 1; n <= n_max; ++n) mu[static_cast<std::size_t>(n - 1)] = omega * std::log(static_cast<double>(n));
    return merge_exponents(lambda, mu);
}

/// Product of two finite general Dirichlet series with exponents merged in ascending order.
///
/// Infinite series must be truncated first; the product of the truncations is exact.
inline GeneralDirichletSeries multiply_merged(const GeneralDirichletSeries& f, const GeneralDirichletSeries& g) {
    if (!f.finite() || !g.finite()) {
        throw error(errc::malformed_input, "multiply_merged needs finite series; truncate infinite series first");
    }
    const long nf = f.support_end();
    const long ng = g.support_end();
    std::vector<double> lambda;
    std::vector<double> mu;
    for (long m = 1; m <= nf; ++m) lambda.push_back(f.exponent(m));
    for (long n = 1; n <= ng; ++n) mu.push_back(g.exponent(n));
    const std::vector<MergedTerm> merged = merge_exponents(lambda, mu);
    GeneralDirichletSeries out;
    for (const MergedTerm& t : merged) {
        const complex c = f.coefficients(t.m) * g.coefficients(t.n);
        if (c == complex{}) continue;
        out.coefficients.head.push_back(c);
        out.exponents.push_back(t.nu);
    }
    return out;
}

} // namespace dsk
