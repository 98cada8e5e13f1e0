#pragma once

#include "dsk/sequence.hpp"
#include "dsk/sk_matrix.hpp"
#include "dsk/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <climits>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace dsk {

namespace detail {

inline bool same_rule(const SequenceRule& a, const SequenceRule& b) {
    return a.kind == b.kind && a.scale == b.scale && a.ratio == b.ratio && a.exponent == b.exponent &&
           a.values == b.values;
}

inline long sat_add(long a, long b) {
    if (a == LONG_MAX || b == LONG_MAX) return LONG_MAX;
    if (b > 0 && a > LONG_MAX - b) return LONG_MAX;
    return a + b;
}

inline long sat_sub(long a, long b) {
    if (a == LONG_MAX) return LONG_MAX;
    return a - b;
}

/// Upper bound on sum_{i=lo}^{hi} i^{-beta}.
inline double index_power_sum(long lo, long hi, double beta) {
    lo = std::max(lo, 1L);
    if (hi < lo) return 0.0;
    constexpr long budget = 1 << 16;
    double sum = 0.0;
    long i = lo;
    const long stop = hi == LONG_MAX ? lo + budget : std::min(hi, lo + (1L << 24));
    for (; i <= stop && i <= hi; ++i) sum += std::pow(static_cast<double>(i), -beta);
    sum *= 1.0 + 16.0 * kUnitRoundoff;
    if (i > hi) return sum;
    return sum + power_geometric_tail(1.0, -beta, 1.0, i);
}

} // namespace detail

inline Sequence scaled(Sequence x, complex alpha) {
    for (auto& v : x.head) v *= alpha;
    x.factor *= alpha;
    if (alpha == complex{}) {
        x.tail.reset();
        x.factor = 1.0;
    }
    return x;
}

inline Sequence conjugated(Sequence x) {
    for (auto& v : x.head) v = std::conj(v);
    x.factor = std::conj(x.factor);
    x.conj = !x.conj;
    return x;
}

/// x + beta * y when the result is representable as a single head plus rule.
inline Sequence combine(const Sequence& x, const Sequence& y, complex beta) {
    const bool xt = x.tail && x.factor != complex{} && !x.tail->finite();
    const bool yt = y.tail && y.factor != complex{} && beta != complex{} && !y.tail->finite();
    Sequence out;
    if (xt && yt && !(detail::same_rule(*x.tail, *y.tail) && x.shift == y.shift && x.conj == y.conj)) {
        throw error(errc::uncertifiable, "sum of two differently generated sequences is not representable");
    }
    long len = std::max(x.head_size(), y.head_size());
    if (!xt) len = std::max(len, x.support_end());
    if (!yt && beta != complex{}) len = std::max(len, y.support_end());
    out.head.resize(static_cast<std::size_t>(len));
    for (long i = 1; i <= len; ++i) out.head[static_cast<std::size_t>(i - 1)] = x(i) + beta * y(i);
    if (xt || yt) {
        const Sequence& t = xt ? x : y;
        out.tail = t.tail;
        out.shift = t.shift;
        out.conj = t.conj;
        out.factor = (xt ? x.factor : complex{}) + (yt ? beta * y.factor : complex{});
    }
    return out;
}

/// Rectangle of indices m in [m_lo, m_hi], n in [n_lo, n_hi]; the upper ends may be LONG_MAX.
struct IndexRegion {
    long m_lo = 1;
    long m_hi = LONG_MAX;
    long n_lo = 1;
    long n_hi = LONG_MAX;

    bool empty() const noexcept { return m_hi < m_lo || n_hi < n_lo; }
};

/// Truncated dense matrix; entries outside the stored N x N block are zero.
struct DenseMatrix {
    Eigen::MatrixXcd entries;
};

struct DiagonalMatrix {
    Sequence diag;
};

/// bands[k + d] holds a_{m,n} with n - m = d, indexed by min(m, n).
struct BandedMatrix {
    long k = 0;
    std::vector<Sequence> bands;
};

struct RankOneMatrix {
    Sequence fhat;
};

class CoefficientMatrix;

/// base - col * row / pivot, with the first row and column set to zero.
struct DowndatedMatrix {
    std::shared_ptr<const CoefficientMatrix> base;
    Sequence col;
    Sequence row;
    complex pivot{1.0, 0.0};
};

/// The coefficient matrix (a_{m,n}) of a Dirichlet series kernel.
///
/// When `open_tail` is set, only the leading `known_order()` section is determined by the
/// variant; the remaining entries are bounded by `envelope` alone.
class CoefficientMatrix {
public:
    using Variant = std::variant<DenseMatrix, DiagonalMatrix, BandedMatrix, SkMatrix, RankOneMatrix, DowndatedMatrix>;

    Variant data;
    std::optional<GrowthEnvelope> envelope; // |a_{m,n}| <= C m^alpha n^alpha
    bool open_tail = false;

    CoefficientMatrix() : data(DenseMatrix{}) {}
    explicit CoefficientMatrix(Variant v) : data(std::move(v)) {}

    static CoefficientMatrix zero() { return CoefficientMatrix{DenseMatrix{}}; }
    static CoefficientMatrix dense(Eigen::MatrixXcd a) { return CoefficientMatrix{DenseMatrix{std::move(a)}}; }
    static CoefficientMatrix diagonal(Sequence d) { return CoefficientMatrix{DiagonalMatrix{std::move(d)}}; }
    static CoefficientMatrix banded(long k, std::vector<Sequence> bands) {
        if (k < 0 || bands.size() != static_cast<std::size_t>(2 * k + 1)) {
            throw error(errc::malformed_input, "banded matrix needs 2k+1 bands");
        }
        return CoefficientMatrix{BandedMatrix{k, std::move(bands)}};
    }
    static CoefficientMatrix arrowhead(SkMatrix sk) {
        sk.validate();
        return CoefficientMatrix{std::move(sk)};
    }
    static CoefficientMatrix rank_one(Sequence f) { return CoefficientMatrix{RankOneMatrix{std::move(f)}}; }
    /// Unit coordinate matrix e_m.
    static CoefficientMatrix unit(long m) {
        std::vector<complex> d(static_cast<std::size_t>(m), complex{});
        d.back() = 1.0;
        return diagonal(Sequence{std::move(d)});
    }

    std::string variant_name() const {
        static const char* names[] = {"dense", "diagonal", "banded", "arrowhead", "rank_one", "downdated"};
        return names[data.index()];
    }

    template <class T>
    const T* as() const noexcept {
        return std::get_if<T>(&data);
    }

    complex entry(long m, long n) const {
        if (m < 1 || n < 1) return {};
        if (open_tail && (m > known_order() || n > known_order())) return {};
        return structural_entry(m, n);
    }

    /// Largest index carrying a possibly nonzero entry (LONG_MAX for infinite matrices).
    long support_end() const {
        if (open_tail) return LONG_MAX;
        return structural_support();
    }

    /// Order of the leading section determined exactly by the variant.
    long known_order() const { return structural_support(); }

    bool finite() const { return support_end() != LONG_MAX; }

    Eigen::MatrixXcd truncation(long order) const {
        Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(order, order);
        if (const auto* d = as<DenseMatrix>(); d && !open_tail) {
            const long n = std::min<long>(order, d->entries.rows());
            a.topLeftCorner(n, n) = d->entries.topLeftCorner(n, n);
            return a;
        }
        for (long m = 1; m <= order; ++m) {
            for (long n = 1; n <= order; ++n) a(m - 1, n - 1) = entry(m, n);
        }
        return a;
    }

    /// Column n as a sequence in m; its Dirichlet series is the analytic symbol A_n.
    Sequence column(long n) const {
        if (open_tail) return finite_prefix([&](long m) { return entry(m, n); });
        return std::visit([&](const auto& v) { return column_of(v, n); }, data);
    }

    /// Row m as a sequence in n.
    Sequence row(long m) const {
        if (open_tail) return finite_prefix([&](long n) { return entry(m, n); });
        return std::visit([&](const auto& v) { return row_of(v, m); }, data);
    }

    /// Upper bound on the sum of |a_{m,n}| m^{-sigma_m} n^{-sigma_n} over the region.
    double abs_weighted_sum(const IndexRegion& r, double sigma_m, double sigma_n) const {
        if (r.empty()) return 0.0;
        if (!open_tail) return std::min(structural_sum(r, sigma_m, sigma_n), envelope_sum(r, sigma_m, sigma_n));
        const long N = known_order();
        IndexRegion inner{r.m_lo, std::min(r.m_hi, N), r.n_lo, std::min(r.n_hi, N)};
        double total = inner.empty() ? 0.0 : structural_sum(inner, sigma_m, sigma_n);
        if (r.m_hi <= N && r.n_hi <= N) return total;
        IndexRegion right{r.m_lo, std::min(r.m_hi, N), std::max(r.n_lo, N + 1), r.n_hi};
        IndexRegion below{std::max(r.m_lo, N + 1), r.m_hi, r.n_lo, r.n_hi};
        total += envelope_sum(right, sigma_m, sigma_n) + envelope_sum(below, sigma_m, sigma_n);
        return total;
    }

    /// Bound from the declared envelope alone (+inf without one).
    double envelope_sum(const IndexRegion& r, double sigma_m, double sigma_n) const {
        if (r.empty()) return 0.0;
        if (!envelope) return kInf;
        const GrowthEnvelope& e = *envelope;
        if (e.C == 0.0) return 0.0;
        const double pm = detail::index_power_sum(r.m_lo, r.m_hi, sigma_m - e.alpha);
        if (pm == 0.0) return 0.0;
        const double pn = detail::index_power_sum(r.n_lo, r.n_hi, sigma_n - e.alpha);
        if (pn == 0.0) return 0.0;
        return e.C * pm * pn;
    }

private:
    template <class F>
    Sequence finite_prefix(F&& f) const {
        const long N = known_order();
        std::vector<complex> v(static_cast<std::size_t>(N));
        for (long i = 1; i <= N; ++i) v[static_cast<std::size_t>(i - 1)] = f(i);
        return Sequence{std::move(v)};
    }

    complex structural_entry(long m, long n) const {
        return std::visit(
            [&](const auto& v) -> complex {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, DenseMatrix>) {
                    if (m > v.entries.rows() || n > v.entries.cols()) return {};
                    return v.entries(m - 1, n - 1);
                } else if constexpr (std::is_same_v<T, DiagonalMatrix>) {
                    return m == n ? v.diag(m) : complex{};
                } else if constexpr (std::is_same_v<T, BandedMatrix>) {
                    const long d = n - m;
                    if (d > v.k || -d > v.k) return {};
                    return v.bands[static_cast<std::size_t>(v.k + d)](std::min(m, n));
                } else if constexpr (std::is_same_v<T, SkMatrix>) {
                    return v.entry(m, n);
                } else if constexpr (std::is_same_v<T, RankOneMatrix>) {
                    return v.fhat(m) * std::conj(v.fhat(n));
                } else {
                    if (m == 1 || n == 1) return {};
                    return v.base->entry(m, n) - v.col(m) * v.row(n) / v.pivot;
                }
            },
            data);
    }

    long structural_support() const {
        return std::visit(
            [&](const auto& v) -> long {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, DenseMatrix>) {
                    return static_cast<long>(v.entries.rows());
                } else if constexpr (std::is_same_v<T, DiagonalMatrix>) {
                    return v.diag.support_end();
                } else if constexpr (std::is_same_v<T, BandedMatrix>) {
                    long e = 0;
                    for (long d = -v.k; d <= v.k; ++d) {
                        e = std::max(e, detail::sat_add(v.bands[static_cast<std::size_t>(v.k + d)].support_end(),
                                                        d < 0 ? -d : d));
                    }
                    return e;
                } else if constexpr (std::is_same_v<T, SkMatrix>) {
                    return v.order();
                } else if constexpr (std::is_same_v<T, RankOneMatrix>) {
                    return v.fhat.support_end();
                } else {
                    return v.base->open_tail ? v.base->known_order() : v.base->support_end();
                }
            },
            data);
    }

    static Sequence column_of(const DenseMatrix& v, long n) {
        std::vector<complex> c;
        if (n <= v.entries.cols()) {
            for (long m = 0; m < v.entries.rows(); ++m) c.push_back(v.entries(m, n - 1));
        }
        return Sequence{std::move(c)};
    }
    static Sequence row_of(const DenseMatrix& v, long m) {
        std::vector<complex> r;
        if (m <= v.entries.rows()) {
            for (long n = 0; n < v.entries.cols(); ++n) r.push_back(v.entries(m - 1, n));
        }
        return Sequence{std::move(r)};
    }

    static Sequence column_of(const DiagonalMatrix& v, long n) {
        std::vector<complex> c(static_cast<std::size_t>(n), complex{});
        c.back() = v.diag(n);
        return Sequence{std::move(c)};
    }
    static Sequence row_of(const DiagonalMatrix& v, long m) { return column_of(v, m); }

    static Sequence column_of(const BandedMatrix& v, long n) {
        std::vector<complex> c(static_cast<std::size_t>(n + v.k), complex{});
        for (long m = std::max(1L, n - v.k); m <= n + v.k; ++m) {
            const long d = n - m;
            c[static_cast<std::size_t>(m - 1)] = v.bands[static_cast<std::size_t>(v.k + d)](std::min(m, n));
        }
        return Sequence{std::move(c)};
    }
    static Sequence row_of(const BandedMatrix& v, long m) {
        std::vector<complex> r(static_cast<std::size_t>(m + v.k), complex{});
        for (long n = std::max(1L, m - v.k); n <= m + v.k; ++n) {
            const long d = n - m;
            r[static_cast<std::size_t>(n - 1)] = v.bands[static_cast<std::size_t>(v.k + d)](std::min(m, n));
        }
        return Sequence{std::move(r)};
    }

    static Sequence column_of(const SkMatrix& v, long n) {
        if (n > v.k) {
            if (n > v.order()) return Sequence{};
            std::vector<complex> c(static_cast<std::size_t>(n), complex{});
            for (long m = 1; m <= v.k; ++m) c[static_cast<std::size_t>(m - 1)] = v.c(n - v.k);
            c.back() = v.d(n - v.k);
            return Sequence{std::move(c)};
        }
        Sequence s = v.c_sequence(true);
        for (long m = 1; m <= v.k; ++m) s.head[static_cast<std::size_t>(m - 1)] = v.b(m - 1, n - 1);
        return s;
    }
    static Sequence row_of(const SkMatrix& v, long m) { return conjugated(column_of(v, m)); }

    static Sequence column_of(const RankOneMatrix& v, long n) { return scaled(v.fhat, std::conj(v.fhat(n))); }
    static Sequence row_of(const RankOneMatrix& v, long m) { return scaled(conjugated(v.fhat), v.fhat(m)); }

    static Sequence column_of(const DowndatedMatrix& v, long n) {
        if (n == 1) return Sequence{};
        Sequence s = combine(v.base->column(n), v.col, -v.row(n) / v.pivot);
        if (s.head.empty()) s.head.resize(1);
        s.head[0] = 0.0;
        return s;
    }
    static Sequence row_of(const DowndatedMatrix& v, long m) {
        if (m == 1) return Sequence{};
        Sequence s = combine(v.base->row(m), v.row, -v.col(m) / v.pivot);
        if (s.head.empty()) s.head.resize(1);
        s.head[0] = 0.0;
        return s;
    }

    /// sum |x_i| m^{-sm} n^{-sn} along (m, n) = (i, i + d) for d >= 0 or (i - d, i) for d < 0.
    static double path_sum(const Sequence& x, long d, long i_lo, long i_hi, double sm, double sn) {
        i_lo = std::max(i_lo, 1L);
        i_hi = std::min(i_hi, x.support_end());
        if (i_hi < i_lo) return 0.0;
        const long ad = d < 0 ? -d : d;
        // Weight of the farther index relative to i.
        const double s_far = d >= 0 ? sn : sm;
        const double s_near = d >= 0 ? sm : sn;
        constexpr long budget = 4096;
        double sum = 0.0;
        long i = i_lo;
        const long stop = i_hi == LONG_MAX ? i_lo + budget : i_hi;
        for (; i <= stop && i <= i_hi; ++i) {
            const double a = std::abs(x(i));
            if (a == 0.0) continue;
            const double fi = static_cast<double>(i);
            sum += a * std::pow(fi, -s_near) * std::pow(fi + static_cast<double>(ad), -s_far);
        }
        sum *= 1.0 + 16.0 * kUnitRoundoff;
        if (i > i_hi) return sum;
        // i + |d| <= (1 + |d|) i bounds the far weight when its exponent is negative.
        const double far = s_far >= 0.0 ? 1.0 : std::pow(1.0 + static_cast<double>(ad), -s_far);
        return sum + far * x.abs_weighted_sum(i, i_hi, s_near + s_far);
    }

    static double sum_field(const DenseMatrix& v, const IndexRegion& r, double sm, double sn) {
        const long N = v.entries.rows();
        double sum = 0.0;
        for (long m = std::max(r.m_lo, 1L); m <= std::min(r.m_hi, N); ++m) {
            const double wm = std::pow(static_cast<double>(m), -sm);
            for (long n = std::max(r.n_lo, 1L); n <= std::min(r.n_hi, N); ++n) {
                sum += std::abs(v.entries(m - 1, n - 1)) * wm * std::pow(static_cast<double>(n), -sn);
            }
        }
        return sum * (1.0 + 16.0 * kUnitRoundoff);
    }

    static double sum_field(const DiagonalMatrix& v, const IndexRegion& r, double sm, double sn) {
        return path_sum(v.diag, 0, std::max(r.m_lo, r.n_lo), std::min(r.m_hi, r.n_hi), sm, sn);
    }

    static double sum_field(const BandedMatrix& v, const IndexRegion& r, double sm, double sn) {
        double sum = 0.0;
        for (long d = -v.k; d <= v.k; ++d) {
            const Sequence& x = v.bands[static_cast<std::size_t>(v.k + d)];
            long lo;
            long hi;
            if (d >= 0) {
                lo = std::max(r.m_lo, r.n_lo - d);
                hi = std::min(r.m_hi, detail::sat_sub(r.n_hi, d));
            } else {
                lo = std::max(r.n_lo, r.m_lo + d);
                hi = std::min(r.n_hi, detail::sat_sub(r.m_hi, -d));
            }
            sum += path_sum(x, d, lo, hi, sm, sn);
        }
        return sum;
    }

    static double sum_field(const SkMatrix& v, const IndexRegion& r, double sm, double sn) {
        const long k = v.k;
        double sum = 0.0;
        for (long m = std::max(r.m_lo, 1L); m <= std::min(r.m_hi, k); ++m) {
            for (long n = std::max(r.n_lo, 1L); n <= std::min(r.n_hi, k); ++n) {
                sum += std::abs(v.b(m - 1, n - 1)) * std::pow(static_cast<double>(m), -sm) *
                       std::pow(static_cast<double>(n), -sn);
            }
        }
        const double pm = detail::index_power_sum(r.m_lo, std::min(r.m_hi, k), sm);
        if (pm > 0.0) sum += pm * v.c_sequence(false).abs_weighted_sum(std::max(r.n_lo, k + 1), r.n_hi, sn);
        const double pn = detail::index_power_sum(r.n_lo, std::min(r.n_hi, k), sn);
        if (pn > 0.0) sum += pn * v.c_sequence(true).abs_weighted_sum(std::max(r.m_lo, k + 1), r.m_hi, sm);
        sum += v.d_sequence().abs_weighted_sum(std::max({r.m_lo, r.n_lo, k + 1}), std::min(r.m_hi, r.n_hi), sm + sn);
        return sum;
    }

    static double sum_field(const RankOneMatrix& v, const IndexRegion& r, double sm, double sn) {
        const double a = v.fhat.abs_weighted_sum(r.m_lo, r.m_hi, sm);
        if (a == 0.0) return 0.0;
        const double b = v.fhat.abs_weighted_sum(r.n_lo, r.n_hi, sn);
        if (b == 0.0) return 0.0;
        return a * b;
    }

    static double sum_field(const DowndatedMatrix& v, const IndexRegion& r, double sm, double sn) {
        double sum = v.base->abs_weighted_sum(r, sm, sn);
        const double a = v.col.abs_weighted_sum(std::max(r.m_lo, 2L), r.m_hi, sm);
        if (a == 0.0) return sum;
        const double b = v.row.abs_weighted_sum(std::max(r.n_lo, 2L), r.n_hi, sn);
        if (b == 0.0) return sum;
        return sum + a * b / std::abs(v.pivot);
    }

    double structural_sum(const IndexRegion& r, double sm, double sn) const {
        return std::visit([&](const auto& v) { return sum_field(v, r, sm, sn); }, data);
    }
};

} // namespace dsk
