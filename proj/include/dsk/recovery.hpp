#pragma once

#include "dsk/kernel.hpp"
#include "dsk/types.hpp"

#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace dsk {

#if defined(__SIZEOF_FLOAT128__)
using wide_real = __float128;
#else
using wide_real = long double;
#endif

/// Minimal complex number over wide_real; only the operations recovery needs.
struct wide_complex {
    wide_real re = 0;
    wide_real im = 0;

    wide_complex() = default;
    wide_complex(wide_real r, wide_real i = 0) : re(r), im(i) {}
    explicit wide_complex(complex z) : re(z.real()), im(z.imag()) {}

    complex narrow() const { return {static_cast<double>(re), static_cast<double>(im)}; }
    double abs() const { return std::hypot(static_cast<double>(re), static_cast<double>(im)); }

    friend wide_complex operator+(wide_complex a, wide_complex b) { return {a.re + b.re, a.im + b.im}; }
    friend wide_complex operator-(wide_complex a, wide_complex b) { return {a.re - b.re, a.im - b.im}; }
    friend wide_complex operator*(wide_complex a, wide_complex b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend wide_complex operator*(wide_real x, wide_complex a) { return {x * a.re, x * a.im}; }
    friend wide_complex operator/(wide_complex a, wide_real x) { return {a.re / x, a.im / x}; }
    wide_complex& operator+=(wide_complex b) { return *this = *this + b; }
    wide_complex& operator-=(wide_complex b) { return *this = *this - b; }
};

/// kappa(p0 + i, p0 + j) for integer steps i, j >= 0.
using GridSampler = std::function<wide_complex(long i, long j)>;

/// Black-box kernel evaluator (s, u) -> kappa(s, u).
using KernelEvaluator = std::function<complex(complex, complex)>;

struct RecoveryOptions {
    double tol = 1e-8;
    long max_steps = 200;
};

struct RecoveryResult {
    complex value{};
    std::vector<complex> trace; // successive estimates along the real arguments
};

/// Peels a_{m,n} out of a sampled kernel.
///
/// For fixed s = p the map q -> kappa(p, q) is the Dirichlet series with coefficients
/// A_n(p); those are peeled first, then a_{m,n} is peeled out of p -> A_n(p). Each peel
/// rescales the remainder by n^q and removes the known rates (n/j)^q, j <= order, by
/// repeated Richardson elimination, so finite sections are recovered at the first
/// argument and infinite tails converge geometrically. Samples use the unknowns
/// c'_j = c_j j^{-p0}, which keeps every power an exact integer step.
class CoefficientRecoverer {
public:
    CoefficientRecoverer(GridSampler sampler, double p0, long order, RecoveryOptions opt = {})
        : sampler_(std::move(sampler)), p0_(p0), order_(order), opt_(opt) {
        if (order_ < 1) throw error(errc::malformed_input, "recovery order must be positive");
        scale_ = std::max(sample(0, 0).abs(), 1e-300);
    }

    RecoveryResult recover_traced(long m, long n) {
        check_index(m);
        check_index(n);
        std::vector<complex> trace;
        for (long j = 1; j <= m; ++j) outer(j, n, j == m ? &trace : nullptr);
        const wide_complex scaled = outer_cache_[n][static_cast<std::size_t>(m - 1)];
        RecoveryResult r;
        r.value = unscale(scaled, m, n);
        r.trace = std::move(trace);
        return r;
    }

    complex recover(long m, long n) { return recover_traced(m, n).value; }

    double p0() const noexcept { return p0_; }

private:
    void check_index(long i) const {
        if (i < 1 || i > order_) {
            throw error(errc::malformed_input, "index " + std::to_string(i) + " outside recovery order");
        }
    }

    complex unscale(wide_complex c, long m, long n) const {
        const long double f = std::pow(static_cast<long double>(m), static_cast<long double>(p0_)) *
                              std::pow(static_cast<long double>(n), static_cast<long double>(p0_));
        return (static_cast<wide_real>(f) * c).narrow();
    }

    wide_complex sample(long i, long j) {
        auto key = std::make_pair(i, j);
        if (auto it = samples_.find(key); it != samples_.end()) return it->second;
        const wide_complex v = sampler_(i, j);
        samples_.emplace(key, v);
        return v;
    }

    /// Estimate of c'_n from F(t) = sum_j c'_j j^{-t}, the lower coefficients given.
    template <class F>
    wide_complex peel(F&& f, long n, const std::vector<wide_complex>& lower, double tol, double unscale_factor,
                      std::vector<complex>* trace) {
        std::vector<wide_complex> E;
        auto e_at = [&](long t) {
            while (static_cast<long>(E.size()) <= t) {
                const long tt = static_cast<long>(E.size());
                wide_complex r = f(tt);
                for (long j = 1; j < n; ++j) {
                    r -= pow_int(1.0 / static_cast<wide_real>(j), tt) * lower[static_cast<std::size_t>(j - 1)];
                }
                E.push_back(pow_int(static_cast<wide_real>(n), tt) * r);
            }
            return E[static_cast<std::size_t>(t)];
        };
        std::vector<wide_complex> est;
        for (long t = 0; t <= opt_.max_steps; ++t) {
            std::vector<wide_complex> v;
            v.reserve(static_cast<std::size_t>(order_));
            for (long i = 0; i < order_; ++i) v.push_back(e_at(t + i));
            for (long j = 1; j <= order_; ++j) {
                if (j == n) continue;
                const wide_real r = static_cast<wide_real>(n) / static_cast<wide_real>(j);
                for (std::size_t i = 0; i + 1 < v.size(); ++i) v[i] = (v[i + 1] - r * v[i]) / (1 - r);
                v.pop_back();
            }
            est.push_back(v.front());
            if (trace) trace->push_back((static_cast<wide_real>(unscale_factor) * v.front()).narrow());
            const std::size_t k = est.size();
            if (k >= 3) {
                const double scale = std::max(scale_, unscale_factor * est[k - 1].abs());
                const double d1 = unscale_factor * (est[k - 1] - est[k - 2]).abs();
                const double d2 = unscale_factor * (est[k - 2] - est[k - 3]).abs();
                if (d1 <= tol * scale && d2 <= tol * scale) return est[k - 1];
            }
        }
        throw error(errc::recovery_diverged, "recovery diverged: estimates for index " + std::to_string(n) +
                                                 " did not settle within " + std::to_string(opt_.max_steps) +
                                                 " steps");
    }

    static wide_real pow_int(wide_real x, long t) {
        wide_real r = 1;
        while (t > 0) {
            if (t & 1) r *= x;
            x *= x;
            t >>= 1;
        }
        return r;
    }

    /// Scaled symbols c'_1..c'_n of q -> kappa(p0 + i, q).
    const std::vector<wide_complex>& symbols(long i, long n) {
        std::vector<wide_complex>& s = inner_cache_[i];
        while (static_cast<long>(s.size()) < n) {
            const long target = static_cast<long>(s.size()) + 1;
            const double uf = std::pow(static_cast<double>(target), p0_);
            const wide_complex c =
                peel([&](long t) { return sample(i, t); }, target, s, opt_.tol * 1e-3, uf, nullptr);
            s.push_back(c);
        }
        return s;
    }

    void outer(long m, long n, std::vector<complex>* trace) {
        std::vector<wide_complex>& col = outer_cache_[n];
        if (static_cast<long>(col.size()) >= m) return;
        const double uf = std::pow(static_cast<double>(m), p0_) * std::pow(static_cast<double>(n), p0_);
        const wide_complex c =
            peel([&](long t) { return symbols(t, n)[static_cast<std::size_t>(n - 1)]; }, m, col, opt_.tol, uf, trace);
        col.push_back(c);
    }

    GridSampler sampler_;
    double p0_;
    long order_;
    RecoveryOptions opt_;
    double scale_ = 1.0;
    std::map<std::pair<long, long>, wide_complex> samples_;
    std::map<long, std::vector<wide_complex>> inner_cache_;
    std::map<long, std::vector<wide_complex>> outer_cache_;
};

/// Samples a black-box evaluator at (p0 + i, p0 + j).
inline GridSampler evaluator_sampler(KernelEvaluator eval, double p0) {
    return [eval = std::move(eval), p0](long i, long j) {
        return wide_complex{eval(complex{p0 + static_cast<double>(i), 0.0}, complex{p0 + static_cast<double>(j), 0.0})};
    };
}

/// Samples the section of order `section` of a coefficient matrix in wide precision.
inline GridSampler matrix_sampler(const CoefficientMatrix& a, double p0, long section) {
    const long L = std::min(section, a.open_tail ? a.known_order() : a.support_end());
    auto base = std::make_shared<std::vector<wide_real>>(static_cast<std::size_t>(L + 1));
    auto inv = std::make_shared<std::vector<wide_real>>(static_cast<std::size_t>(L + 1));
    for (long m = 1; m <= L; ++m) {
        (*base)[static_cast<std::size_t>(m)] =
            static_cast<wide_real>(std::pow(static_cast<long double>(m), -static_cast<long double>(p0)));
        (*inv)[static_cast<std::size_t>(m)] = 1 / static_cast<wide_real>(m);
    }
    // Weight rows m^{-p0-i}, built by exact steps from the previous row and kept;
    // a deque keeps earlier rows in place while later ones are appended.
    auto rows = std::make_shared<std::deque<std::vector<wide_real>>>(1, *base);
    auto weights = [rows, inv, L](long i) -> const std::vector<wide_real>& {
        while (static_cast<long>(rows->size()) <= i) {
            std::vector<wide_real> next = rows->back();
            for (long m = 1; m <= L; ++m) next[static_cast<std::size_t>(m)] *= (*inv)[static_cast<std::size_t>(m)];
            rows->push_back(std::move(next));
        }
        return (*rows)[static_cast<std::size_t>(i)];
    };
    if (const auto* d = a.as<DiagonalMatrix>(); d && !a.open_tail) {
        auto diag = std::make_shared<std::vector<wide_complex>>();
        for (long m = 1; m <= L; ++m) diag->push_back(wide_complex{d->diag(m)});
        return [diag, weights, L](long i, long j) {
            const auto& wi = weights(i);
            const auto& wj = weights(j);
            wide_complex sum;
            for (long m = L; m >= 1; --m) {
                sum += (wi[static_cast<std::size_t>(m)] * wj[static_cast<std::size_t>(m)]) *
                       (*diag)[static_cast<std::size_t>(m - 1)];
            }
            return sum;
        };
    }
    auto entries = std::make_shared<Eigen::MatrixXcd>(a.truncation(L));
    return [entries, weights, L](long i, long j) {
        const auto& wi = weights(i);
        const auto& wj = weights(j);
        wide_complex sum;
        for (long m = L; m >= 1; --m) {
            wide_complex row;
            for (long n = L; n >= 1; --n) {
                const complex e = (*entries)(m - 1, n - 1);
                if (e != complex{}) row += wj[static_cast<std::size_t>(n)] * wide_complex{e};
            }
            sum += wi[static_cast<std::size_t>(m)] * row;
        }
        return sum;
    };
}

/// a_{m,n} recovered from a black-box evaluator on H_rho x H_rho; arguments start at rho + 2.
inline complex coefficient_recover(const KernelEvaluator& eval, double rho, long m, long n, long order,
                                   RecoveryOptions opt = {}) {
    CoefficientRecoverer r(evaluator_sampler(eval, rho + 2.0), rho + 2.0, order, opt);
    return r.recover(m, n);
}

/// Default sampling section for kernels backed by a coefficient matrix.
inline long default_sample_section(const CoefficientMatrix& a, long order) {
    const long end = a.open_tail ? a.known_order() : a.support_end();
    if (end != LONG_MAX) return end;
    return a.as<DiagonalMatrix>() ? std::max(4096L, 64 * order) : std::max(64L, 4 * order);
}

inline CoefficientRecoverer kernel_recoverer(const DirichletKernel& kernel, long order, RecoveryOptions opt = {}) {
    const double p0 = kernel.domain.rho + 2.0;
    return CoefficientRecoverer(matrix_sampler(kernel.matrix, p0, default_sample_section(kernel.matrix, order)), p0,
                                order, opt);
}

inline complex coefficient_recover(const DirichletKernel& kernel, long m, long n, long order,
                                   RecoveryOptions opt = {}) {
    return kernel_recoverer(kernel, order, opt).recover(m, n);
}

} // namespace dsk
