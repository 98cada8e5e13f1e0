#pragma once

#include "dsk/kernel.hpp"
#include "dsk/matrix.hpp"
#include "dsk/series.hpp"
#include "dsk/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dsk {

/// A_n(s) = sum_m a_{m,n} m^{-s}, the Dirichlet series of column n.
struct AnalyticSymbol {
    long n = 1;
    OrdinaryDirichletSeries series;
};

inline AnalyticSymbol analytic_symbol(const CoefficientMatrix& a, long n) {
    if (n < 1) throw error(errc::malformed_input, "symbol index must be positive");
    AnalyticSymbol out;
    out.n = n;
    out.series.coefficients = a.column(n);
    out.series.open_tail = a.open_tail;
    if (a.envelope) {
        const GrowthEnvelope& e = *a.envelope;
        out.series.envelope = GrowthEnvelope{e.C * std::pow(static_cast<double>(n), e.alpha), e.alpha, 1.0};
    }
    return out;
}

/// span{A_1, ..., A_N} with the Gram matrix G_{m,n} = <A_n, A_m> = a_{m,n}.
struct FiniteGramModel {
    long order = 0;
    Eigen::MatrixXcd G;
    PsdCertificate certificate;

    static FiniteGramModel build(const CoefficientMatrix& a, long order, double tol = 1e-9) {
        FiniteGramModel m;
        m.order = order;
        m.certificate = psd_check(a, order, tol);
        if (!m.certificate.psd()) {
            throw error(errc::not_psd, "Gram model needs a PSD section; failed at order " +
                                           std::to_string(m.certificate.witness_order));
        }
        m.G = a.truncation(order);
        return m;
    }

    /// <f, g> for f = sum c_n A_n and g = sum d_n A_n.
    complex inner(const Eigen::VectorXcd& c, const Eigen::VectorXcd& d) const { return d.dot(G * c); }

    /// Coordinates of kappa_t = sum_n n^{-conj(t)} A_n.
    Eigen::VectorXcd kernel_section(complex t) const {
        Eigen::VectorXcd c(order);
        for (long n = 1; n <= order; ++n) c(n - 1) = npow(static_cast<double>(n), std::conj(t));
        return c;
    }

    /// f(s) = sum_n c_n A_n(s) on the section.
    complex evaluate(const Eigen::VectorXcd& c, complex s) const {
        complex sum{};
        const Eigen::VectorXcd gc = G * c;
        for (long m = 1; m <= order; ++m) sum += gc(m - 1) * npow(static_cast<double>(m), s);
        return sum;
    }

    /// True when G is nonsingular, so only the zero vector is orthogonal to every symbol.
    bool null_space_trivial(double tol = 1e-9) const {
        if (order == 0) return true;
        const SectionSpectrum sp = hermitian_spectrum(G);
        return sp.min_eigenvalue > tol * (1.0 + sp.norm);
    }
};

struct ResidualReport {
    double residual = 0.0;
    complex lhs{};
    complex rhs{};
    double bound = 0.0;

    bool within_bound() const noexcept { return residual <= bound; }
};

/// kappa(s, u) against sum_{n <= order} A_n(s) n^{-conj(u)}.
inline ResidualReport expansion_check(const DirichletKernel& kernel, complex s, complex u, long order) {
    const ValueWithBound k = kernel_eval(kernel, s, u, order);
    const CoefficientMatrix& a = kernel.matrix;
    const long last = std::min(order, a.open_tail ? a.known_order() : a.support_end());
    complex sum{};
    double abs_sum = 0.0;
    for (long n = 1; n <= last; ++n) {
        const Sequence col = a.column(n);
        complex an{};
        const long end = std::min(last, col.support_end());
        for (long m = 1; m <= end; ++m) {
            const complex v = col(m);
            if (v == complex{}) continue;
            const complex t = v * npow(static_cast<double>(m), s);
            an += t;
            abs_sum += std::abs(t) * std::exp(-u.real() * std::log(static_cast<double>(n)));
        }
        sum += an * npow(static_cast<double>(n), std::conj(u));
    }
    ResidualReport r;
    r.lhs = k.value;
    r.rhs = sum;
    r.residual = std::abs(k.value - sum);
    const double chain = static_cast<double>(std::max(last, 1L));
    r.bound = 2.0 * k.rounding +
              kUnitRoundoff * abs_sum * (2.0 * chain + 16.0 + (std::abs(s) + std::abs(u)) * std::log(chain + 1.0));
    return r;
}

/// <kappa_t, kappa_s> in the Gram model against kernel_eval(s, t).
inline ResidualReport reproducing_check(const FiniteGramModel& model, const DirichletKernel& kernel, complex t,
                                        complex s, long order) {
    ResidualReport r;
    r.lhs = model.inner(model.kernel_section(t), model.kernel_section(s));
    const ValueWithBound k = kernel_eval(kernel, s, t, order);
    r.rhs = k.value;
    r.residual = std::abs(r.lhs - r.rhs);
    // Model and kernel agree up to the larger section's tail plus rounding on both sides.
    const double model_tail =
        order > model.order ? kernel_tail_radius(kernel.matrix, model.order, s.real(), t.real()) : 0.0;
    const double kernel_tail = model.order > order ? kernel_tail_radius(kernel.matrix, order, s.real(), t.real()) : 0.0;
    r.bound = model_tail + kernel_tail + 2.0 * k.rounding + kUnitRoundoff * 64.0 * static_cast<double>(model.order) *
                                                                (std::abs(r.lhs) + model.G.cwiseAbs().sum());
    return r;
}

struct LimitTrace {
    complex inner{};                 // <f, A_1>
    std::vector<double> p;           // the grid
    std::vector<complex> values;     // f(p)
    std::vector<double> differences; // |<f, A_1> - f(p)|
    double residual = 0.0;
    bool monotone = true;
};

/// <f, A_1> against f(p) along an increasing grid of real arguments.
inline LimitTrace limit_at_infinity_check(const FiniteGramModel& model, const Eigen::VectorXcd& c,
                                          const std::vector<double>& p_grid) {
    if (c.size() != model.order) throw error(errc::malformed_input, "coordinate vector must match the model order");
    LimitTrace out;
    Eigen::VectorXcd e1 = Eigen::VectorXcd::Zero(model.order);
    if (model.order > 0) e1(0) = 1.0;
    out.inner = model.inner(c, e1);
    double prev = kInf;
    for (double p : p_grid) {
        const complex v = model.evaluate(c, complex{p, 0.0});
        const double d = std::abs(out.inner - v);
        out.p.push_back(p);
        out.values.push_back(v);
        out.differences.push_back(d);
        // Differences at the rounding floor count as settled.
        const double floor = 64.0 * kUnitRoundoff * (1.0 + std::abs(out.inner));
        if (d > prev && d > floor) out.monotone = false;
        prev = d;
    }
    out.residual = out.differences.empty() ? 0.0 : out.differences.back();
    return out;
}

/// Sum_n <f, A_n> n^{-s} against Sum_n c_n A_n(s) on the model.
inline double expansion_identity_residual(const FiniteGramModel& model, const Eigen::VectorXcd& c, complex s) {
    complex lhs{};
    for (long n = 1; n <= model.order; ++n) {
        Eigen::VectorXcd en = Eigen::VectorXcd::Zero(model.order);
        en(n - 1) = 1.0;
        lhs += model.inner(c, en) * npow(static_cast<double>(n), s);
    }
    complex rhs{};
    for (long n = 1; n <= model.order; ++n) {
        complex an{};
        for (long m = 1; m <= model.order; ++m) an += model.G(m - 1, n - 1) * npow(static_cast<double>(m), s);
        rhs += c(n - 1) * an;
    }
    return std::abs(lhs - rhs);
}

/// b_{m,n} = a_{m,n} - a_{m,1} a_{1,n} / a_{1,1}, the kernel of the functions vanishing at infinity.
inline CoefficientMatrix infinity_kernel(const CoefficientMatrix& a) {
    const complex a11 = a.entry(1, 1);
    if (a11 == complex{}) throw error(errc::hypothesis_failed, "hypothesis of corollary fails: a_{1,1} = 0");
    CoefficientMatrix out;
    if (const auto* d = a.as<DiagonalMatrix>(); d && !a.open_tail) {
        DiagonalMatrix nd = *d;
        if (nd.diag.head.empty()) nd.diag.head.resize(1);
        nd.diag.head[0] = 0.0;
        out = CoefficientMatrix{nd};
    } else if (a.as<RankOneMatrix>() && !a.open_tail) {
        out = CoefficientMatrix::zero();
    } else if (const auto* dm = a.as<DenseMatrix>(); dm && !a.open_tail) {
        Eigen::MatrixXcd b = dm->entries;
        const Eigen::VectorXcd col = b.col(0);
        const Eigen::RowVectorXcd row = b.row(0);
        b -= col * row / a11;
        b.row(0).setZero();
        b.col(0).setZero();
        out = CoefficientMatrix::dense(std::move(b));
    } else if (const auto* bm = a.as<BandedMatrix>(); bm && !a.open_tail) {
        // The update lives in the leading (k+1) x (k+1) block, so the bandwidth is kept.
        BandedMatrix nb = *bm;
        const long K = bm->k + 1;
        for (auto& band : nb.bands) {
            if (band.head_size() < K) {
                const long old = band.head_size();
                band.head.resize(static_cast<std::size_t>(K));
                for (long i = old + 1; i <= K; ++i) band.head[static_cast<std::size_t>(i - 1)] = band(i);
            }
        }
        for (long m = 1; m <= K; ++m) {
            for (long n = 1; n <= K; ++n) {
                const long dd = n - m;
                if (dd > bm->k || -dd > bm->k) continue;
                const complex v = (m == 1 || n == 1) ? complex{} : a.entry(m, n) - a.entry(m, 1) * a.entry(1, n) / a11;
                nb.bands[static_cast<std::size_t>(bm->k + dd)].head[static_cast<std::size_t>(std::min(m, n) - 1)] = v;
            }
        }
        out = CoefficientMatrix{nb};
    } else {
        DowndatedMatrix dd;
        dd.base = std::make_shared<const CoefficientMatrix>(a);
        dd.col = a.column(1);
        dd.row = a.row(1);
        dd.pivot = a11;
        out = CoefficientMatrix{dd};
        out.open_tail = a.open_tail;
    }
    if (a.envelope) {
        GrowthEnvelope e = *a.envelope;
        e.C = e.C * (1.0 + e.C / std::abs(a11));
        out.envelope = e;
    }
    return out;
}

struct MembershipReport {
    bool member = false;
    std::optional<double> c_star;
    double c_max = 1e6;
    double resolution = 1e-6;
    long order = 0;
    std::vector<double> c_trace;      // bisection points
    std::vector<double> eigen_trace;  // lambda_min(c^2 a - f f*) at those points
    std::string note;
};

/// Smallest c in [0, c_max] with c^2 a - f f* PSD on the section of the given order.
inline MembershipReport membership_test(const CoefficientMatrix& a, const std::vector<complex>& fhat, long order,
                                        double tol = 1e-9, double c_max = 1e6, double resolution = 1e-6) {
    if (order < 1) throw error(errc::malformed_input, "order must be positive");
    const PsdCertificate cert = psd_check(a, order, tol);
    if (!cert.psd()) throw error(errc::not_psd, "membership needs a PSD matrix at the requested order");
    MembershipReport rep;
    rep.c_max = c_max;
    rep.resolution = resolution;
    rep.order = order;
    const Eigen::MatrixXcd A = a.truncation(order);
    Eigen::VectorXcd f = Eigen::VectorXcd::Zero(order);
    for (long n = 1; n <= order && n <= static_cast<long>(fhat.size()); ++n) f(n - 1) = fhat[static_cast<std::size_t>(n - 1)];
    const Eigen::MatrixXcd F = f * f.adjoint();
    auto psd_at = [&](double c) {
        const SectionSpectrum sp = hermitian_spectrum(c * c * A - F);
        rep.c_trace.push_back(c);
        rep.eigen_trace.push_back(sp.min_eigenvalue);
        return sp.min_eigenvalue >= -tol * (1.0 + sp.norm);
    };
    if (psd_at(0.0)) {
        rep.member = true;
        rep.c_star = 0.0;
        rep.note = "member at this order";
        return rep;
    }
    if (!psd_at(c_max)) {
        rep.note = "not member up to c_max at this order";
        return rep;
    }
    double lo = 0.0;
    double hi = c_max;
    while (hi - lo > resolution) {
        const double mid = 0.5 * (lo + hi);
        (psd_at(mid) ? hi : lo) = mid;
    }
    rep.member = true;
    rep.c_star = hi;
    rep.note = "member at this order";
    return rep;
}

} // namespace dsk
