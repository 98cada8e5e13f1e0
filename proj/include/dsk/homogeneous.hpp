#pragma once

#include "dsk/kernel.hpp"
#include "dsk/matrix.hpp"
#include "dsk/rational.hpp"
#include "dsk/sequence.hpp"
#include "dsk/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <climits>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace dsk {

/// Membership rule for supp(a), a subset of the positive integers.
struct SupportRule {
    enum class Kind { all, powers_of, generated_by, explicit_set };

    Kind kind = Kind::all;
    std::vector<long> generators; // base for powers_of, primes for generated_by
    std::set<long> members;       // explicit_set

    static SupportRule all() { return {}; }
    static SupportRule powers_of(long p) {
        if (p < 2) throw error(errc::malformed_input, "powers_of needs a base >= 2");
        return {Kind::powers_of, {p}, {}};
    }
    static SupportRule generated_by(std::vector<long> g) {
        for (long p : g) {
            if (p < 2) throw error(errc::malformed_input, "generators must be >= 2");
        }
        return {Kind::generated_by, std::move(g), {}};
    }
    static SupportRule explicit_set(std::set<long> m) { return {Kind::explicit_set, {}, std::move(m)}; }

    bool contains(long n) const {
        if (n < 1) return false;
        switch (kind) {
        case Kind::all: return true;
        case Kind::powers_of: {
            const long p = generators[0];
            while (n % p == 0) n /= p;
            return n == 1;
        }
        case Kind::generated_by:
            for (long p : generators) {
                while (n % p == 0) n /= p;
            }
            return n == 1;
        case Kind::explicit_set: return members.count(n) > 0;
        }
        return false;
    }

    std::vector<long> enumerate(long M) const {
        std::vector<long> out;
        if (kind == Kind::explicit_set) {
            for (long n : members) {
                if (n >= 1 && n <= M) out.push_back(n);
            }
            return out;
        }
        for (long n = 1; n <= M; ++n) {
            if (contains(n)) out.push_back(n);
        }
        return out;
    }

    std::string name() const {
        static const char* names[] = {"all", "powers_of", "generated_by", "explicit"};
        return names[static_cast<int>(kind)];
    }
};

struct AdmissibilityReport {
    bool multiplicative = true;
    std::optional<std::pair<long, long>> closure_failure; // m, n with mn <= M but mn outside
    std::optional<std::pair<long, long>> coprime_pair;
    bool admissible_up_to_M = false;
    long support_size = 0;
};

inline AdmissibilityReport admissibility_check(const SupportRule& support, long M) {
    if (M < 4) throw error(errc::malformed_input, "admissibility_check needs M >= 4");
    AdmissibilityReport out;
    const std::vector<long> s = support.enumerate(M);
    out.support_size = static_cast<long>(s.size());
    for (std::size_t i = 0; i < s.size() && out.multiplicative; ++i) {
        for (std::size_t j = i; j < s.size() && s[i] <= M / s[j]; ++j) {
            if (!support.contains(s[i] * s[j])) {
                out.multiplicative = false;
                out.closure_failure = std::make_pair(s[i], s[j]);
                break;
            }
        }
    }
    // The pair search is capped so that dense supports without a coprime pair stay cheap.
    const std::size_t cap = std::min<std::size_t>(s.size(), 2000);
    for (std::size_t i = 0; i < cap && !out.coprime_pair; ++i) {
        if (s[i] == 1) continue;
        for (std::size_t j = i + 1; j < cap; ++j) {
            if (std::gcd(s[i], s[j]) == 1) {
                out.coprime_pair = std::make_pair(s[i], s[j]);
                break;
            }
        }
    }
    out.admissible_up_to_M = out.multiplicative && out.coprime_pair.has_value();
    return out;
}

/// Kernel translates k_{a + ib_j} of a diagonal kernel, truncated at order M.
struct TranslateSpan {
    double a = 1.0;
    std::vector<Rational> offsets;
    Sequence diagonal{SequenceRule::constant(1.0)};
    SupportRule support;
    long order = 1000;
    double rho = 0.5;

    double weight(long n) const { return support.contains(n) ? diagonal(n).real() : 0.0; }

    void validate() const {
        if (!(a > rho)) throw error(errc::malformed_input, "translate span needs a > rho");
        if (order < 1) throw error(errc::malformed_input, "order must be positive");
        std::vector<Rational> b = offsets;
        std::sort(b.begin(), b.end());
        if (std::adjacent_find(b.begin(), b.end()) != b.end()) {
            throw error(errc::duplicate_offset, "offsets must be pairwise distinct");
        }
    }
};

struct GramReport {
    Eigen::MatrixXcd G;
    double tail_bound = 0.0; // per-entry bound on the discarded part n > M
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
    double tolerance = 0.0;
    bool independent = false;           // min eigenvalue > tol
    bool independence_certified = false; // min eigenvalue > tol + N * tail_bound
};

/// G_{j,k} = <k_{a+ib_k}, k_{a+ib_j}> = sum_{n <= M} a_n n^{-2a} n^{-i(b_j - b_k)}.
inline GramReport translate_gram(const TranslateSpan& span, double tol = 1e-10) {
    span.validate();
    const long N = static_cast<long>(span.offsets.size());
    GramReport out;
    out.tolerance = tol;
    out.G = Eigen::MatrixXcd::Zero(N, N);
    if (N == 0) return out;
    struct Pair {
        long j, k;
        double delta; // b_j - b_k, formed exactly before rounding
        long double re = 0.0L, im = 0.0L;
    };
    std::vector<Pair> pairs;
    for (long j = 0; j < N; ++j) {
        for (long k = j + 1; k < N; ++k) {
            pairs.push_back({j, k, (span.offsets[static_cast<std::size_t>(j)] - span.offsets[static_cast<std::size_t>(k)])
                                       .to_double()});
        }
    }
    long double diag = 0.0L;
    for (long n = 1; n <= span.order; ++n) {
        const double an = span.weight(n);
        if (an == 0.0) continue;
        const double ln = std::log(static_cast<double>(n));
        const double w = an * std::exp(-2.0 * span.a * ln);
        diag += w;
        for (Pair& p : pairs) {
            const double t = p.delta * ln;
            p.re += w * std::cos(t);
            p.im -= w * std::sin(t);
        }
    }
    for (long j = 0; j < N; ++j) out.G(j, j) = static_cast<double>(diag);
    for (const Pair& p : pairs) {
        const complex g{static_cast<double>(p.re), static_cast<double>(p.im)};
        out.G(p.j, p.k) = g;
        out.G(p.k, p.j) = std::conj(g);
    }
    out.tail_bound = span.diagonal.abs_weighted_sum(span.order + 1, LONG_MAX, 2.0 * span.a);
    const double rounding = 8.0 * kUnitRoundoff * static_cast<double>(diag) * std::log(static_cast<double>(span.order) + 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(out.G);
    out.min_eigenvalue = es.eigenvalues()(0);
    out.max_eigenvalue = es.eigenvalues()(N - 1);
    out.independent = out.min_eigenvalue > tol;
    out.independence_certified = out.min_eigenvalue > tol + static_cast<double>(N) * (out.tail_bound + rounding);
    return out;
}

/// Finite combination sum_b v_b f_b in exact label coordinates; zero coefficients are never stored.
class SpanVector {
public:
    using Map = std::map<Rational, ExactComplex>;

    SpanVector() = default;
    static SpanVector delta(const Rational& b, ExactComplex c = {Rational{1}, Rational{0}}) {
        SpanVector v;
        v.add(b, c);
        return v;
    }

    void add(const Rational& b, const ExactComplex& c) {
        auto [it, fresh] = terms_.try_emplace(b, c);
        if (!fresh) it->second = it->second + c;
        if (it->second.is_zero()) terms_.erase(it);
    }

    const Map& terms() const noexcept { return terms_; }
    bool is_zero() const noexcept { return terms_.empty(); }

    friend SpanVector operator+(SpanVector x, const SpanVector& y) {
        for (const auto& [b, c] : y.terms_) x.add(b, c);
        return x;
    }
    friend SpanVector operator-(SpanVector x, const SpanVector& y) {
        for (const auto& [b, c] : y.terms_) x.add(b, ExactComplex{} - c);
        return x;
    }
    friend SpanVector operator*(const ExactComplex& s, const SpanVector& x) {
        SpanVector out;
        for (const auto& [b, c] : x.terms_) out.add(b, s * c);
        return out;
    }
    friend bool operator==(const SpanVector& x, const SpanVector& y) = default;

private:
    Map terms_;
};

/// T f_b = ib f_b, without restricting labels to a span.
inline SpanVector apply_T(const SpanVector& v) {
    SpanVector out;
    for (const auto& [b, c] : v.terms()) out.add(b, ExactComplex::i_times(b) * c);
    return out;
}

/// T restricted to the span's offsets; other labels are refused.
inline SpanVector apply_T(const TranslateSpan& span, const SpanVector& v) {
    for (const auto& [b, c] : v.terms()) {
        if (std::find(span.offsets.begin(), span.offsets.end(), b) == span.offsets.end()) {
            throw error(errc::unknown_label, "offset label " + b.str() + " is not in the span");
        }
    }
    return apply_T(v);
}

/// U_c f_b = f_{b+c}.
inline SpanVector apply_Uc(const Rational& c, const SpanVector& v) {
    SpanVector out;
    for (const auto& [b, x] : v.terms()) out.add(b + c, x);
    return out;
}

/// U_c T f_b - (T - ic) U_c f_b; the zero vector when the homogeneity relation holds.
inline SpanVector homogeneity_verify(const Rational& c, const Rational& b) {
    const SpanVector fb = SpanVector::delta(b);
    const SpanVector lhs = apply_Uc(c, apply_T(fb));
    const SpanVector shifted = apply_Uc(c, fb);
    const SpanVector rhs = apply_T(shifted) - ExactComplex::i_times(c) * shifted;
    return lhs - rhs;
}

struct MdeltaReport {
    bool finite = false;
    double partial_sum = 0.0;
    double remainder_bound = kInf;
    bool canonical = true;
    // Canonical case only: comparison with the diagonal kernel at (a - delta, a - delta).
    std::optional<double> kernel_value;
    double identity_residual = 0.0;
    double identity_bound = 0.0;
    bool identity_ok = false;
    std::string note;
};

/// Partial sum of sum_{n in supp} n^{2 delta} |b_n|^2 / a_n, with b_n = a_n n^{-a} when b is absent.
inline MdeltaReport mdelta_check(const TranslateSpan& span, const std::optional<Sequence>& b_seq, double delta, long M) {
    if (!(delta > 0.0)) throw error(errc::malformed_input, "delta must be positive");
    if (M < 1) throw error(errc::malformed_input, "M must be positive");
    MdeltaReport out;
    out.canonical = !b_seq.has_value();
    long double sum = 0.0L;
    for (long n = 1; n <= M; ++n) {
        if (!span.support.contains(n)) continue;
        const double an = span.diagonal(n).real();
        const double ln = std::log(static_cast<double>(n));
        if (out.canonical) {
            if (an < 0.0) throw error(errc::malformed_input, "a_n must be nonnegative");
            sum += an * std::exp(-2.0 * (span.a - delta) * ln);
            continue;
        }
        const double bn = std::abs((*b_seq)(n));
        if (!(an > 0.0)) {
            if (bn != 0.0) {
                throw error(errc::malformed_input, "a_n = 0 at support index " + std::to_string(n));
            }
            continue;
        }
        sum += std::exp(2.0 * delta * ln) * bn * bn / an;
    }
    out.partial_sum = static_cast<double>(sum);
    const double rounding = 8.0 * kUnitRoundoff * out.partial_sum * std::log(static_cast<double>(M) + 1.0);
    if (out.canonical) {
        out.remainder_bound = span.diagonal.abs_weighted_sum(M + 1, LONG_MAX, 2.0 * (span.a - delta));
    } else {
        const Sequence& a = span.diagonal;
        const Sequence& b = *b_seq;
        std::optional<GrowthEnvelope> lower;
        if (a.tail && a.shift == 0 && !a.conj && a.factor == complex{1.0, 0.0}) lower = a.tail->lower_envelope();
        if (b.finite() && b.support_end() <= M) {
            out.remainder_bound = 0.0;
        } else if (lower && lower->C > 0.0 && a.head_size() <= M && b.head_size() <= M) {
            const GrowthEnvelope eb = b.tail_envelope();
            out.remainder_bound = power_geometric_tail(eb.C * eb.C / lower->C, 2.0 * eb.alpha + 2.0 * delta - lower->alpha,
                                                       eb.q * eb.q / lower->q, M + 1);
        } else {
            out.note = "no lower envelope for a_n: remainder not certified";
        }
    }
    out.finite = std::isfinite(out.remainder_bound);
    out.remainder_bound += rounding;
    if (out.canonical && out.finite) {
        // The same quantity as a kernel value, evaluated at a ten times larger order.
        DirichletKernel k{CoefficientMatrix::diagonal(span.diagonal), HalfPlane{span.rho}};
        const double x = span.a - delta;
        if (x > span.rho && span.support.kind == SupportRule::Kind::all) {
            const ValueWithBound v = kernel_eval(k, x, x, 10 * M);
            out.kernel_value = v.value.real();
            out.identity_residual = std::abs(v.value.real() - out.partial_sum);
            out.identity_bound = v.total_radius() + out.remainder_bound;
            out.identity_ok = out.identity_residual <= out.identity_bound;
        } else if (!(x > span.rho)) {
            out.note = "a - delta outside the kernel domain: identity not evaluated";
        } else {
            out.note = "identity evaluated only for full support";
        }
    }
    return out;
}

struct AdjointProbe {
    std::vector<double> b_grid;
    std::vector<complex> functional; // <h, T f_b> = -ib phi_1(ib)
    std::vector<complex> fit_coefficients;
    double fit_residual = 0.0; // RMS misfit of the least-squares Dirichlet polynomial
    double functional_max = 0.0;
    double growth = 0.0; // max |functional| / max(1, |b|)
    long fit_order = 0;
};

/// Least-squares fit of sum_{n <= K} g_n n^{-ib} to b -> <h, T f_b>. A diagnostic only.
inline AdjointProbe adjoint_domain_probe(const std::vector<complex>& hhat, const std::vector<double>& b_grid,
                                         const TranslateSpan& span, long fit_order = 8) {
    AdjointProbe out;
    out.b_grid = b_grid;
    out.fit_order = fit_order;
    const long G = static_cast<long>(b_grid.size());
    if (G == 0) return out;
    const complex i{0.0, 1.0};
    const long M = std::min<long>(span.order, static_cast<long>(hhat.size()));
    for (double b : b_grid) {
        // phi_1(ib) = sum h(n) b_n / a_n n^{-ib} with b_n = a_n n^{-a}.
        complex phi1{};
        for (long n = 1; n <= M; ++n) {
            if (span.weight(n) == 0.0) continue;
            const double ln = std::log(static_cast<double>(n));
            phi1 += hhat[static_cast<std::size_t>(n - 1)] * std::exp(-span.a * ln) * std::exp(-i * b * ln);
        }
        const complex v = -i * b * phi1;
        out.functional.push_back(v);
        out.functional_max = std::max(out.functional_max, std::abs(v));
        out.growth = std::max(out.growth, std::abs(v) / std::max(1.0, std::abs(b)));
    }
    Eigen::MatrixXcd A(G, fit_order);
    Eigen::VectorXcd y(G);
    for (long r = 0; r < G; ++r) {
        y(r) = out.functional[static_cast<std::size_t>(r)];
        for (long n = 1; n <= fit_order; ++n) {
            A(r, n - 1) = std::exp(-i * b_grid[static_cast<std::size_t>(r)] * std::log(static_cast<double>(n)));
        }
    }
    const Eigen::VectorXcd g = A.completeOrthogonalDecomposition().solve(y);
    out.fit_coefficients.assign(g.data(), g.data() + g.size());
    out.fit_residual = (A * g - y).norm() / std::sqrt(static_cast<double>(G));
    return out;
}

} // namespace dsk
