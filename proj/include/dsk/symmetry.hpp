#pragma once

#include "dsk/kernel.hpp"
#include "dsk/matrix.hpp"
#include "dsk/series.hpp"
#include "dsk/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace dsk {

inline constexpr double kPi = 3.14159265358979323846;

/// phi_A(s) = (a(s - rho) - ib) / (ic(s - rho) + d) + rho for A = (a, b; c, d) in SL_2(R).
struct Automorphism {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;
    double rho = 0.0;

    static Automorphism identity(double rho) { return {1.0, 0.0, 0.0, 1.0, rho}; }
    /// phi_b(s) = s - ib.
    static Automorphism translation(double b, double rho) { return {1.0, b, 0.0, 1.0, rho}; }
    /// psi_a(s) = a^2 (s - rho) + rho.
    static Automorphism scaling(double a, double rho) {
        if (a == 0.0) throw error(errc::malformed_input, "scaling parameter must be nonzero");
        return {a, 0.0, 0.0, 1.0 / a, rho};
    }
    static Automorphism from(double a, double b, double c, double d, double rho) {
        Automorphism g{a, b, c, d, rho};
        g.validate();
        return g;
    }

    double det() const noexcept { return a * d - b * c; }
    bool linear() const noexcept { return c == 0.0; }

    void validate() const {
        if (!(std::abs(det() - 1.0) <= 1e-12)) {
            throw error(errc::malformed_input, "automorphism matrix must have determinant 1, got " + std::to_string(det()));
        }
    }

    complex operator()(complex s) const {
        if (!(s.real() > rho)) {
            throw error(errc::outside_region, "point outside H_rho: Re(s) = " + std::to_string(s.real()));
        }
        const complex i{0.0, 1.0};
        const complex w = s - rho;
        return (a * w - i * b) / (i * c * w + d) + rho;
    }

    Automorphism inverse() const { return {d, -b, -c, a, rho}; }
};

/// Matrix product, so compose(A, B)(s) = A(B(s)).
inline Automorphism compose(const Automorphism& x, const Automorphism& y) {
    if (x.rho != y.rho) throw error(errc::malformed_input, "automorphisms act on different half-planes");
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d, x.rho};
}

inline complex apply_automorphism(const Automorphism& phi, complex s) { return phi(s); }

/// A point set (s, u) and one automorphism where the kernel fails to be preserved.
struct InvarianceWitness {
    Automorphism phi;
    complex s, u;
    double violation = 0.0; // |kappa(phi s, phi u) - kappa(s, u)|
    double radius = 0.0;    // combined error radius of the two evaluations
};

struct TranslationReport {
    bool invariant = false;      // structural verdict
    bool numeric_agrees = false; // sampled cross-check matches the structural verdict
    std::optional<long> bandwidth;
    std::optional<InvarianceWitness> witness;
    long samples = 0;
    double max_sampled_excess = 0.0; // max over samples of |difference| - combined radius
};

namespace detail {

inline std::optional<InvarianceWitness> invariance_violation(const DirichletKernel& kernel, const Automorphism& phi,
                                                             complex s, complex u, long order, double tol) {
    const ValueWithBound k0 = kernel_eval(kernel, s, u, order);
    const ValueWithBound k1 = kernel_eval(kernel, phi(s), phi(u), order);
    const double diff = std::abs(k1.value - k0.value);
    const double radius = k0.total_radius() + k1.total_radius();
    if (diff > radius + tol) return InvarianceWitness{phi, s, u, diff, radius};
    return std::nullopt;
}

inline void keep_larger(std::optional<InvarianceWitness>& best, std::optional<InvarianceWitness> w) {
    if (w && (!best || w->violation - w->radius > best->violation - best->radius)) best = w;
}

/// Off-diagonal index pairs ordered by |a_{m,n}| (mn)^{-sigma}.
inline std::vector<std::pair<long, long>> dominant_off_diagonal(const CoefficientMatrix& a, long order, double sigma,
                                                                std::size_t count) {
    struct Cand {
        double w;
        long m, n;
    };
    std::vector<Cand> c;
    for (long m = 1; m <= order; ++m) {
        for (long n = m + 1; n <= order; ++n) {
            const double mag = std::max(std::abs(a.entry(m, n)), std::abs(a.entry(n, m)));
            if (mag > 0.0) c.push_back({mag * std::pow(static_cast<double>(m * n), -sigma), m, n});
        }
    }
    std::sort(c.begin(), c.end(), [](const Cand& x, const Cand& y) { return x.w > y.w; });
    std::vector<std::pair<long, long>> out;
    for (std::size_t i = 0; i < c.size() && i < count; ++i) out.emplace_back(c[i].m, c[i].n);
    return out;
}

inline std::vector<std::pair<complex, complex>> probe_points(double rho) {
    std::vector<std::pair<complex, complex>> pts;
    for (double dx : {0.25, 0.5, 1.0, 2.0}) {
        const double x = rho + dx;
        pts.push_back({x, x});
        pts.push_back({complex{x, 0.7}, complex{x, -0.3}});
        pts.push_back({complex{x, 1.9}, complex{x + 0.5, 0.4}});
    }
    return pts;
}

} // namespace detail

/// A diagonal matrix is exactly the translation-invariant case; sampled evaluations corroborate the verdict.
inline TranslationReport translation_invariance_test(const DirichletKernel& kernel, long order, double tol,
                                                     unsigned long seed = 20240601ul) {
    TranslationReport out;
    const CoefficientMatrix& a = kernel.matrix;
    const double rho = kernel.domain.rho;
    out.bandwidth = bandwidth_detect(a, order, tol);
    out.invariant = out.bandwidth && *out.bandwidth == 0;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> re(rho + 0.5, rho + 3.0), im(-10.0, 10.0), bd(-10.0, 10.0);
    double excess = -kInf;
    for (int t = 0; t < 20; ++t) {
        const complex s{re(rng), im(rng)}, u{re(rng), im(rng)};
        const Automorphism phi = Automorphism::translation(bd(rng), rho);
        const ValueWithBound k0 = kernel_eval(kernel, s, u, order);
        const ValueWithBound k1 = kernel_eval(kernel, phi(s), phi(u), order);
        const double radius = k0.total_radius() + k1.total_radius();
        const double diff = std::abs(k1.value - k0.value);
        excess = std::max(excess, diff - radius);
        if (diff > radius + tol) detail::keep_larger(out.witness, InvarianceWitness{phi, s, u, diff, radius});
        ++out.samples;
    }
    out.max_sampled_excess = excess;
    if (!out.invariant) {
        // Shifting by pi / |log(n/m)| flips the sign of the (m, n) term.
        for (double dx : {0.25, 0.5, 1.0, 2.0}) {
            for (auto [m, n] : detail::dominant_off_diagonal(a, order, rho + dx, 4)) {
                const double logr = std::log(static_cast<double>(n) / static_cast<double>(m));
                for (double b : {kPi / logr, kPi / (2.0 * logr)}) {
                    const Automorphism phi = Automorphism::translation(b, rho);
                    for (auto [s, u] : detail::probe_points(rho)) {
                        detail::keep_larger(out.witness, detail::invariance_violation(kernel, phi, s, u, order, tol));
                    }
                }
            }
        }
    }
    out.numeric_agrees = out.invariant ? !out.witness.has_value() : out.witness.has_value();
    if (out.invariant) out.witness.reset();
    return out;
}

/// f with a_{m,n} = f(m) conj(f(n)) on the section, when the section is numerically rank one.
struct RankOneFactor {
    std::optional<Eigen::VectorXcd> factor;
    std::vector<double> singular_values; // descending
    double residual = 0.0;               // max |a_{m,n} - f(m) conj(f(n))|
};

inline RankOneFactor rank_one_analysis(const CoefficientMatrix& matrix, long order, double tol = 1e-8) {
    RankOneFactor out;
    const Eigen::MatrixXcd a = matrix.truncation(order);
    const Eigen::MatrixXcd h = (a + a.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    if (es.info() != Eigen::Success) throw error(errc::internal_check, "Hermitian eigen-solve failed");
    const Eigen::VectorXd lam = es.eigenvalues();
    std::vector<long> idx(static_cast<std::size_t>(order));
    for (long i = 0; i < order; ++i) idx[static_cast<std::size_t>(i)] = i;
    std::sort(idx.begin(), idx.end(), [&](long x, long y) { return std::abs(lam(x)) > std::abs(lam(y)); });
    for (long i : idx) out.singular_values.push_back(std::abs(lam(i)));
    const double s1 = out.singular_values.empty() ? 0.0 : out.singular_values[0];
    if (s1 == 0.0) {
        out.factor = Eigen::VectorXcd::Zero(order);
        return out;
    }
    const double s2 = out.singular_values.size() > 1 ? out.singular_values[1] : 0.0;
    const long top = idx[0];
    // A negative dominant eigenvalue gives -f f*, which has no factorization.
    if (s2 > tol * s1 || lam(top) < 0.0) return out;
    Eigen::VectorXcd f = std::sqrt(lam(top)) * es.eigenvectors().col(top);
    const double fmax = f.cwiseAbs().maxCoeff();
    for (long i = 0; i < order; ++i) {
        if (std::abs(f(i)) > 1e-12 * fmax) {
            f *= std::abs(f(i)) / f(i);
            break;
        }
    }
    out.residual = (a - f * f.adjoint()).cwiseAbs().maxCoeff();
    out.factor = f;
    return out;
}

inline std::optional<Eigen::VectorXcd> rank_one_factor(const CoefficientMatrix& matrix, long order, double tol = 1e-8) {
    return rank_one_analysis(matrix, order, tol).factor;
}

struct GridPoint {
    complex z;
    double modulus = 0.0;
    double radius = 0.0;
    bool nonvanishing = false;
};

struct QuasiInvarianceReport {
    enum class Verdict { quasi_invariant, not_quasi_invariant };

    Verdict verdict = Verdict::not_quasi_invariant;
    std::optional<Eigen::VectorXcd> factor;
    bool factor_zero = false;
    std::vector<double> singular_values;
    double factor_residual = 0.0;
    std::vector<GridPoint> grid;
    std::optional<double> zero_free_abscissa; // |f(s)| > 0 certified for Re(s) >= this value
    std::string reason;
    std::string caveat;

    bool quasi_invariant() const noexcept { return verdict == Verdict::quasi_invariant; }
};

namespace detail {

/// The factor as a series, taken from the structure when the matrix is rank one by construction.
inline OrdinaryDirichletSeries factor_series(const CoefficientMatrix& a, const Eigen::VectorXcd& f) {
    if (const auto* r = a.as<RankOneMatrix>(); r && !a.open_tail) {
        // Align the structural factor with the recovered phase.
        complex phase{1.0, 0.0};
        for (long i = 0; i < f.size(); ++i) {
            const complex x = r->fhat(i + 1);
            if (std::abs(x) > 0.0 && std::abs(f(i)) > 0.0) {
                phase = f(i) / x;
                phase /= std::abs(phase);
                break;
            }
        }
        return OrdinaryDirichletSeries{scaled(r->fhat, phase)};
    }
    return OrdinaryDirichletSeries{std::vector<complex>(f.data(), f.data() + f.size())};
}

/// Smallest sigma on a grid with |f(n0)| n0^{-sigma} > sum_{n > n0} |f(n)| n^{-sigma}.
inline std::optional<double> dominance_abscissa(const OrdinaryDirichletSeries& f, double rho) {
    const Sequence& c = f.coefficients;
    long n0 = 0;
    const long scan = std::min(c.support_end(), std::max(64L, c.head_size()));
    for (long n = 1; n <= scan; ++n) {
        if (c(n) != complex{}) {
            n0 = n;
            break;
        }
    }
    if (n0 == 0) return std::nullopt;
    const double lead = std::abs(c(n0));
    for (int step = 1; step <= 800; ++step) {
        const double sigma = rho + 0.25 * step;
        const double rest = c.abs_weighted_sum(n0 + 1, LONG_MAX, sigma);
        if (std::isfinite(rest) && lead * std::pow(static_cast<double>(n0), -sigma) > rest) return sigma;
    }
    return std::nullopt;
}

} // namespace detail

/// Default grid: a few points on vertical lines inside the domain.
inline std::vector<complex> default_classification_grid(double rho) {
    std::vector<complex> g;
    for (double dx : {0.25, 0.75, 1.5, 3.0}) {
        for (double y : {-20.0, -5.0, -1.0, 0.0, 1.0, 5.0, 20.0}) g.push_back({rho + dx, y});
    }
    return g;
}

/// Quasi-invariant kernels are exactly those of the form f(s) conj(f(u)) with f zero or zero-free.
inline QuasiInvarianceReport quasi_invariance_classify(const DirichletKernel& kernel, long order, double tol,
                                                       const std::vector<complex>& grid) {
    QuasiInvarianceReport out;
    const RankOneFactor r = rank_one_analysis(kernel.matrix, order, tol);
    out.singular_values = r.singular_values;
    out.factor_residual = r.residual;
    out.caveat = "nonvanishing is checked on a finite grid plus a far half-plane; this is a partial certificate";
    if (!r.factor) {
        out.reason = "rank >= 2 at order " + std::to_string(order);
        return out;
    }
    out.factor = r.factor;
    if (r.factor->cwiseAbs().maxCoeff() == 0.0) {
        out.factor_zero = true;
        out.verdict = QuasiInvarianceReport::Verdict::quasi_invariant;
        out.reason = "zero kernel: f = 0";
        return out;
    }
    const OrdinaryDirichletSeries f = detail::factor_series(kernel.matrix, *r.factor);
    bool all = true;
    for (complex z : grid) {
        if (!kernel.domain.contains(z)) throw error(errc::outside_region, "grid point outside the kernel domain");
        const ValueWithBound v = evaluate(f, z, std::max(order, 1L));
        GridPoint g{z, std::abs(v.value), v.total_radius(), std::abs(v.value) > v.total_radius()};
        out.grid.push_back(g);
        if (!g.nonvanishing && all) {
            all = false;
            out.reason = "factor vanishes at grid point z = (" + std::to_string(z.real()) + ", " +
                         std::to_string(z.imag()) + ")";
        }
    }
    out.zero_free_abscissa = detail::dominance_abscissa(f, kernel.domain.rho);
    if (all) {
        out.verdict = QuasiInvarianceReport::Verdict::quasi_invariant;
        out.reason = "rank one with a factor nonvanishing on the grid";
    }
    return out;
}

struct AutLReport {
    bool constant = false;
    bool invariant = false;
    std::optional<InvarianceWitness> witness;
};

/// Only constant kernels are preserved by every linear automorphism.
inline AutLReport autL_invariance_test(const DirichletKernel& kernel, long order, double tol) {
    AutLReport out;
    const CoefficientMatrix& a = kernel.matrix;
    const double rho = kernel.domain.rho;
    bool constant = true;
    for (long m = 1; m <= order && constant; ++m) {
        for (long n = 1; n <= order; ++n) {
            if ((m != 1 || n != 1) && std::abs(a.entry(m, n)) > tol) {
                constant = false;
                break;
            }
        }
    }
    out.constant = constant;
    out.invariant = constant;
    if (constant) return out;
    std::vector<Automorphism> candidates;
    for (double s : {2.0, std::sqrt(2.0), 1.0 / std::sqrt(2.0), 3.0}) candidates.push_back(Automorphism::scaling(s, rho));
    for (double b : {1.0, kPi / std::log(2.0), kPi / std::log(1.5), 2.5}) {
        const Automorphism t = Automorphism::translation(b, rho);
        candidates.push_back(t);
        candidates.push_back(compose(Automorphism::scaling(2.0, rho), t));
    }
    for (const Automorphism& phi : candidates) {
        for (auto [s, u] : detail::probe_points(rho)) {
            detail::keep_larger(out.witness, detail::invariance_violation(kernel, phi, s, u, order, tol));
        }
    }
    return out;
}

struct CocycleReport {
    double residual = 0.0; // max |<U k_u, U k_v> - k(v, u)|
    double radius = 0.0;   // propagated error radius of the compared quantities
    double consistency = 0.0; // disagreement between two reference points for the coefficient of U k_u
    long pairs = 0;
};

/// U k_u(s) = J(g^{-1}, s) k_u(g^{-1} s) with J(psi, s) = f(s) / f(psi(s)) is a multiple of k_{g u};
/// the multiple is read off at a reference point and the Gram entries are compared.
inline CocycleReport cocycle_unitarity_check(const Sequence& fhat, const Automorphism& phi,
                                             const std::vector<complex>& points, long order) {
    const OrdinaryDirichletSeries f{fhat};
    const Automorphism inv = phi.inverse();
    auto F = [&](complex z) {
        const ValueWithBound v = evaluate(f, z, order);
        if (!(std::abs(v.value) > v.total_radius())) {
            throw error(errc::hypothesis_failed, "factor vanishes (within error) at a needed point");
        }
        return v;
    };
    auto kappa = [&](complex s, complex u) { return F(s) * conj(F(u)); };
    const double rho = phi.rho;
    const complex refs[2] = {complex{rho + 1.0, 0.5}, complex{rho + 2.0, -1.5}};
    struct Image {
        ValueWithBound alpha;
        complex gu;
    };
    std::vector<Image> images;
    CocycleReport out;
    for (complex u : points) {
        const complex gu = phi(u);
        ValueWithBound alpha[2];
        for (int r = 0; r < 2; ++r) {
            const complex s0 = refs[r];
            const complex t = inv(s0);
            const ValueWithBound J = divide(F(s0), F(t));
            const ValueWithBound Uk = J * kappa(t, u);
            alpha[r] = divide(Uk, kappa(s0, gu));
        }
        out.consistency = std::max(out.consistency, std::abs(alpha[0].value - alpha[1].value));
        images.push_back({alpha[0], gu});
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = 0; j < points.size(); ++j) {
            // <U k_u, U k_v> = alpha_u conj(alpha_v) k(g v, g u)
            const ValueWithBound lhs = images[i].alpha * conj(images[j].alpha) * kappa(images[j].gu, images[i].gu);
            const ValueWithBound rhs = kappa(points[j], points[i]);
            out.residual = std::max(out.residual, std::abs(lhs.value - rhs.value));
            out.radius = std::max(out.radius, lhs.total_radius() + rhs.total_radius());
            ++out.pairs;
        }
    }
    return out;
}

} // namespace dsk
