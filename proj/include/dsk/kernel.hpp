#pragma once

#include "dsk/matrix.hpp"
#include "dsk/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <climits>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace dsk {

/// kappa(s, u) = sum_{m,n} a_{m,n} m^{-s} n^{-conj(u)} on H_rho x H_rho.
struct DirichletKernel {
    CoefficientMatrix matrix;
    HalfPlane domain;
};

namespace detail {

struct Accum {
    complex value{};
    double abs = 0.0;

    void add(complex t) {
        value += t;
        abs += std::abs(t);
    }
};

struct PowerTable {
    std::vector<complex> s; // m^{-s}
    std::vector<complex> u; // n^{-conj(u)}
};

inline PowerTable power_table(long last, complex s, complex u) {
    PowerTable t;
    t.s.resize(static_cast<std::size_t>(last + 1));
    t.u.resize(static_cast<std::size_t>(last + 1));
    for (long i = 1; i <= last; ++i) {
        const double x = static_cast<double>(i);
        t.s[static_cast<std::size_t>(i)] = npow(x, s);
        t.u[static_cast<std::size_t>(i)] = npow(x, std::conj(u));
    }
    return t;
}

/// sum_{i=lo}^{hi} x_i w_i.
inline Accum weighted(const Sequence& x, long lo, long hi, const std::vector<complex>& w) {
    Accum a;
    hi = std::min(hi, x.support_end());
    for (long i = std::max(lo, 1L); i <= hi; ++i) {
        const complex v = x(i);
        if (v != complex{}) a.add(v * w[static_cast<std::size_t>(i)]);
    }
    return a;
}

inline Accum product(const Accum& x, const Accum& y) { return {x.value * y.value, x.abs * y.abs}; }

/// Partial double sum over m, n <= last, organised by the matrix structure.
inline Accum kernel_partial(const CoefficientMatrix& a, long last, const PowerTable& w) {
    if (a.open_tail) {
        const long L = std::min(last, a.known_order());
        Accum acc;
        for (long m = 1; m <= L; ++m) {
            for (long n = 1; n <= L; ++n) {
                const complex v = a.entry(m, n);
                if (v != complex{}) acc.add(v * w.s[static_cast<std::size_t>(m)] * w.u[static_cast<std::size_t>(n)]);
            }
        }
        return acc;
    }
    return std::visit(
        [&](const auto& v) -> Accum {
            using T = std::decay_t<decltype(v)>;
            Accum acc;
            if constexpr (std::is_same_v<T, DenseMatrix>) {
                const long L = std::min<long>(last, v.entries.rows());
                for (long m = 1; m <= L; ++m) {
                    for (long n = 1; n <= L; ++n) {
                        const complex x = v.entries(m - 1, n - 1);
                        if (x != complex{}) acc.add(x * w.s[static_cast<std::size_t>(m)] * w.u[static_cast<std::size_t>(n)]);
                    }
                }
            } else if constexpr (std::is_same_v<T, DiagonalMatrix>) {
                const long L = std::min(last, v.diag.support_end());
                for (long n = 1; n <= L; ++n) {
                    const complex x = v.diag(n);
                    if (x != complex{}) acc.add(x * w.s[static_cast<std::size_t>(n)] * w.u[static_cast<std::size_t>(n)]);
                }
            } else if constexpr (std::is_same_v<T, BandedMatrix>) {
                for (long d = -v.k; d <= v.k; ++d) {
                    const Sequence& x = v.bands[static_cast<std::size_t>(v.k + d)];
                    const long ad = d < 0 ? -d : d;
                    const long L = std::min(last - ad, x.support_end());
                    for (long i = 1; i <= L; ++i) {
                        const complex e = x(i);
                        if (e == complex{}) continue;
                        const long m = d >= 0 ? i : i + ad;
                        const long n = d >= 0 ? i + ad : i;
                        acc.add(e * w.s[static_cast<std::size_t>(m)] * w.u[static_cast<std::size_t>(n)]);
                    }
                }
            } else if constexpr (std::is_same_v<T, SkMatrix>) {
                const long k = std::min(v.k, last);
                for (long m = 1; m <= k; ++m) {
                    for (long n = 1; n <= k; ++n) {
                        acc.add(v.b(m - 1, n - 1) * w.s[static_cast<std::size_t>(m)] * w.u[static_cast<std::size_t>(n)]);
                    }
                }
                if (last > v.k) {
                    Accum head_s;
                    Accum head_u;
                    for (long m = 1; m <= v.k; ++m) {
                        head_s.add(w.s[static_cast<std::size_t>(m)]);
                        head_u.add(w.u[static_cast<std::size_t>(m)]);
                    }
                    const Accum row = weighted(v.c_sequence(false), v.k + 1, last, w.u);
                    const Accum col = weighted(v.c_sequence(true), v.k + 1, last, w.s);
                    const Accum r1 = product(head_s, row);
                    const Accum r2 = product(col, head_u);
                    acc.value += r1.value + r2.value;
                    acc.abs += r1.abs + r2.abs;
                    const long L = std::min(last, v.order());
                    for (long n = v.k + 1; n <= L; ++n) {
                        acc.add(v.d(n - v.k) * w.s[static_cast<std::size_t>(n)] * w.u[static_cast<std::size_t>(n)]);
                    }
                }
            } else if constexpr (std::is_same_v<T, RankOneMatrix>) {
                const Accum f = weighted(v.fhat, 1, last, w.s);
                const Accum g = weighted(conjugated(v.fhat), 1, last, w.u);
                acc = product(f, g);
            } else {
                acc = kernel_partial(*v.base, last, w);
                // The full outer product cancels the first row and column of the base.
                const Accum f = weighted(v.col, 1, last, w.s);
                const Accum g = weighted(v.row, 1, last, w.u);
                const Accum r = product(f, g);
                acc.value -= r.value / v.pivot;
                acc.abs += r.abs / std::abs(v.pivot);
            }
            return acc;
        },
        a.data);
}

} // namespace detail

/// Sum of |a_{m,n}| m^{-sigma_s} n^{-sigma_u} over everything outside the [1, N]^2 section.
inline double kernel_tail_radius(const CoefficientMatrix& a, long N, double sigma_s, double sigma_u) {
    if (N >= a.support_end()) return 0.0;
    const IndexRegion row_tail{1, N, N + 1, LONG_MAX};
    const IndexRegion col_tail{N + 1, LONG_MAX, 1, N};
    const IndexRegion corner{N + 1, LONG_MAX, N + 1, LONG_MAX};
    return a.abs_weighted_sum(row_tail, sigma_s, sigma_u) + a.abs_weighted_sum(col_tail, sigma_s, sigma_u) +
           a.abs_weighted_sum(corner, sigma_s, sigma_u);
}

/// Partial sum over m, n <= order with a certified bound for the three discarded tail pieces.
inline ValueWithBound kernel_eval(const DirichletKernel& kernel, complex s, complex u, long order) {
    if (order < 1) throw error(errc::malformed_input, "order must be positive");
    if (!kernel.domain.contains(s) || !kernel.domain.contains(u)) {
        throw error(errc::outside_region, "not in certified convergence region: need Re(s), Re(u) > rho = " +
                                              std::to_string(kernel.domain.rho));
    }
    const CoefficientMatrix& a = kernel.matrix;
    const long last = std::min(order, a.open_tail ? a.known_order() : a.support_end());
    const detail::PowerTable w = detail::power_table(std::max(last, 0L), s, u);
    const detail::Accum acc = last >= 1 ? detail::kernel_partial(a, last, w) : detail::Accum{};
    ValueWithBound out;
    out.value = acc.value;
    const double chain = static_cast<double>(a.as<DenseMatrix>() ? last * last : std::max(last, 1L));
    out.rounding = kUnitRoundoff * acc.abs *
                   (chain + 16.0 + (std::abs(s) + std::abs(u)) * std::log(static_cast<double>(last + 1)));
    out.error_radius = kernel_tail_radius(a, order, s.real(), u.real());
    return out;
}

/// Terms of the three-piece bound for |k^s l^u kappa_{>=k,>=l}(s,u) - a_{k,l}|.
struct TailBound {
    double bound = 0.0;
    double A1 = 0.0, A2 = 0.0, A3 = 0.0;
    double S1 = 0.0, S2 = 0.0, S3 = 0.0;
    double C_r = 0.0; // max(S1, S2, S3): one constant valid for the whole three-term shape
};

inline TailBound tail_bound_terms(const DirichletKernel& kernel, long k, long l, complex s, complex u, double r) {
    if (k < 1 || l < 1) throw error(errc::malformed_input, "k and l must be positive");
    if (!(r > kernel.domain.rho + 1.0)) {
        throw error(errc::outside_region, "tail bound needs r > rho + 1");
    }
    if (!(s.real() > r) || !(u.real() > r)) throw error(errc::outside_region, "tail bound needs Re(s), Re(u) > r");
    const CoefficientMatrix& a = kernel.matrix;
    TailBound t;
    t.S1 = a.abs_weighted_sum({k, k, l + 1, LONG_MAX}, 0.0, r);
    t.S2 = a.abs_weighted_sum({k + 1, LONG_MAX, l, l}, r, 0.0);
    t.S3 = a.abs_weighted_sum({k + 1, LONG_MAX, l + 1, LONG_MAX}, r, r);
    const double fk = static_cast<double>(k);
    const double fl = static_cast<double>(l);
    const double ls = s.real();
    const double lu = u.real();
    const double log_a1 = lu * std::log(fl) - (lu - r) * std::log(fl + 1.0);
    const double log_a2 = ls * std::log(fk) - (ls - r) * std::log(fk + 1.0);
    t.A1 = std::exp(log_a1);
    t.A2 = std::exp(log_a2);
    t.A3 = std::exp(log_a1 + log_a2);
    auto term = [](double A, double S) { return S == 0.0 ? 0.0 : A * S; };
    t.bound = term(t.A1, t.S1) + term(t.A2, t.S2) + term(t.A3, t.S3);
    t.C_r = std::max({t.S1, t.S2, t.S3});
    return t;
}

inline double tail_bound(const DirichletKernel& kernel, long k, long l, complex s, complex u, double r) {
    return tail_bound_terms(kernel, k, l, s, u, r).bound;
}

inline bool self_adjoint_check(const CoefficientMatrix& a, long order, double tol) {
    for (long m = 1; m <= order; ++m) {
        for (long n = m; n <= order; ++n) {
            if (!(std::abs(a.entry(m, n) - std::conj(a.entry(n, m))) <= tol)) return false;
        }
    }
    return true;
}

struct PsdCertificate {
    enum class Verdict { psd_up_to_order, not_psd };

    long max_order = 0;
    std::vector<long> orders;
    std::vector<double> min_eigenvalues;
    std::vector<double> norms;
    double tolerance = 0.0;
    Verdict verdict = Verdict::psd_up_to_order;
    long witness_order = 0;
    Eigen::VectorXcd witness;
    double witness_value = 0.0; // v* A v for the unit witness vector

    bool psd() const noexcept { return verdict == Verdict::psd_up_to_order; }
};

/// The truncation ladder 2, 4, 8, ..., max_order.
inline std::vector<long> psd_ladder(long max_order) {
    std::vector<long> out;
    if (max_order < 1) return out;
    if (max_order == 1) return {1};
    for (long n = 2; n < max_order; n *= 2) out.push_back(n);
    out.push_back(max_order);
    return out;
}

struct SectionSpectrum {
    double min_eigenvalue = 0.0;
    double norm = 0.0;
    Eigen::VectorXcd min_vector;
};

inline SectionSpectrum hermitian_spectrum(const Eigen::MatrixXcd& a) {
    SectionSpectrum out;
    if (a.rows() == 0) return out;
    const Eigen::MatrixXcd h = (a + a.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    if (es.info() != Eigen::Success) throw error(errc::internal_check, "Hermitian eigen-solve failed");
    out.min_eigenvalue = es.eigenvalues()(0);
    out.norm = std::max(std::abs(es.eigenvalues()(0)), std::abs(es.eigenvalues()(h.rows() - 1)));
    out.min_vector = es.eigenvectors().col(0);
    return out;
}

/// Minimum eigenvalues of the leading sections on the doubling ladder.
inline PsdCertificate psd_check(const CoefficientMatrix& a, long max_order, double tol = 1e-9) {
    if (max_order < 1) throw error(errc::malformed_input, "max_order must be positive");
    const Eigen::MatrixXcd full = a.truncation(max_order);
    const double scale = full.size() ? full.cwiseAbs().maxCoeff() : 0.0;
    if (!((full - full.adjoint()).cwiseAbs().maxCoeff() <= tol * (1.0 + scale))) {
        throw error(errc::not_self_adjoint, "psd_check needs a self-adjoint matrix");
    }
    PsdCertificate cert;
    cert.max_order = max_order;
    cert.tolerance = tol;
    for (long n : psd_ladder(max_order)) {
        const SectionSpectrum sp = hermitian_spectrum(full.topLeftCorner(n, n));
        cert.orders.push_back(n);
        cert.min_eigenvalues.push_back(sp.min_eigenvalue);
        cert.norms.push_back(sp.norm);
        if (cert.psd() && sp.min_eigenvalue < -tol * (1.0 + sp.norm)) {
            cert.verdict = PsdCertificate::Verdict::not_psd;
            cert.witness_order = n;
            cert.witness = sp.min_vector;
            cert.witness_value = (sp.min_vector.adjoint() * full.topLeftCorner(n, n) * sp.min_vector)(0).real();
            break;
        }
    }
    return cert;
}

/// Smallest k with |a_{m,n}| <= tol for |m - n| > k on the section; nullopt when no band is visible.
inline std::optional<long> bandwidth_detect(const CoefficientMatrix& a, long order, double tol) {
    long k = 0;
    for (long m = 1; m <= order; ++m) {
        for (long n = 1; n <= order; ++n) {
            if (std::abs(a.entry(m, n)) > tol) k = std::max(k, m > n ? m - n : n - m);
        }
    }
    if (order > 1 && k >= order - 1) return std::nullopt;
    return k;
}

} // namespace dsk
