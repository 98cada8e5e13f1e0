#pragma once

#include "dsk/sequence.hpp"
#include "dsk/types.hpp"

#include <Eigen/Dense>

#include <climits>
#include <map>
#include <string>

namespace dsk {

/// Arrowhead matrix of the class S_k:
///
///     [ b    c ]      b: k x k Hermitian head
///     [ c*   d ]      c: k x inf, every row equal to (c_{k+1}, c_{k+2}, ...)
///                     d: diag(d_{k+1}, d_{k+2}, ...), all positive
///
/// `c_rule(l)` and `d_rule(l)` give c_{k+l} and d_{k+l}. `d_adjust` adds point
/// perturbations to the tail diagonal (key l, value added to d_{k+l}).
struct SkMatrix {
    long k = 1;
    Eigen::MatrixXcd b;
    SequenceRule c_rule = SequenceRule::constant(0.0);
    SequenceRule d_rule = SequenceRule::constant(1.0);
    std::map<long, double> d_adjust;

    /// Number of tail indices, LONG_MAX for an infinite matrix. An explicit d list ends the matrix.
    long tail_length() const noexcept {
        return d_rule.kind == SequenceRule::Kind::list ? static_cast<long>(d_rule.values.size()) : LONG_MAX;
    }

    long order() const noexcept {
        const long t = tail_length();
        return t == LONG_MAX ? LONG_MAX : k + t;
    }

    complex c(long l) const { return l >= 1 && l <= tail_length() ? c_rule(l) : complex{}; }

    double d(long l) const {
        if (l < 1 || l > tail_length()) return 0.0;
        double v = d_rule(l).real();
        if (auto it = d_adjust.find(l); it != d_adjust.end()) v += it->second;
        return v;
    }

    complex entry(long m, long n) const {
        if (m < 1 || n < 1) return {};
        if (m <= k && n <= k) return b(m - 1, n - 1);
        if (m <= k) return c(n - k);
        if (n <= k) return std::conj(c(m - k));
        return m == n ? complex{d(m - k), 0.0} : complex{};
    }

    /// The c row as a sequence in the column index n (zero for n <= k).
    Sequence c_sequence(bool conjugated) const {
        Sequence s;
        s.head.assign(static_cast<std::size_t>(k), complex{});
        if (c_rule.kind == SequenceRule::Kind::list && tail_length() != LONG_MAX) {
            for (long l = 1; l <= tail_length(); ++l) s.head.push_back(conjugated ? std::conj(c(l)) : c(l));
            return s;
        }
        s.tail = c_rule;
        s.shift = k;
        s.conj = conjugated;
        return s;
    }

    /// The tail diagonal as a sequence in the matrix index n (zero for n <= k).
    Sequence d_sequence() const {
        Sequence s;
        long explicit_len = k;
        if (!d_adjust.empty()) explicit_len = std::max(explicit_len, k + d_adjust.rbegin()->first);
        if (tail_length() != LONG_MAX) explicit_len = std::max(explicit_len, order());
        s.head.reserve(static_cast<std::size_t>(explicit_len));
        for (long n = 1; n <= explicit_len; ++n) s.head.push_back(n <= k ? complex{} : complex{d(n - k), 0.0});
        if (tail_length() == LONG_MAX) {
            s.tail = d_rule;
            s.shift = k;
        }
        return s;
    }

    void validate() const {
        if (k < 1) throw error(errc::malformed_input, "S_k head size k must be positive");
        if (b.rows() != k || b.cols() != k) throw error(errc::malformed_input, "b must be k x k");
        const double scale = 1.0 + b.cwiseAbs().maxCoeff();
        if ((b - b.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
            throw error(errc::not_self_adjoint, "b must be Hermitian");
        }
        auto positive = [](const SequenceRule& r) {
            switch (r.kind) {
            case SequenceRule::Kind::constant:
                return r.scale.imag() == 0.0 && r.scale.real() > 0.0;
            case SequenceRule::Kind::geometric:
                return r.scale.imag() == 0.0 && r.scale.real() > 0.0 && r.ratio > 0.0;
            case SequenceRule::Kind::power:
                return r.scale.imag() == 0.0 && r.scale.real() > 0.0;
            case SequenceRule::Kind::list:
                for (const auto& v : r.values) {
                    if (v.imag() != 0.0 || !(v.real() > 0.0)) return false;
                }
                return true;
            }
            return false;
        };
        if (!positive(d_rule)) throw error(errc::malformed_input, "d must be a positive real sequence");
        for (const auto& [l, delta] : d_adjust) {
            if (l < 1 || l > tail_length() || !(d(l) > 0.0)) {
                throw error(errc::malformed_input, "perturbed d_" + std::to_string(k + l) + " must stay positive");
            }
        }
    }
};

} // namespace dsk
