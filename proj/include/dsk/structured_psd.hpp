#pragma once

#include "dsk/kernel.hpp"
#include "dsk/matrix.hpp"
#include "dsk/sk_matrix.hpp"
#include "dsk/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace dsk {

/// sum_l |c_{k+l}|^2 / d_{k+l}: `value` plus a certified bound `remainder` on what it omits.
struct C2dSum {
    double value = 0.0;
    double remainder = 0.0;
    bool closed_form = false;
    long explicit_terms = 0;
};

namespace detail {

/// (scale, ratio) with x_l = scale * ratio^l for constant and geometric rules.
inline std::optional<std::pair<complex, double>> geometric_form(const SequenceRule& r) {
    if (r.kind == SequenceRule::Kind::constant) return std::make_pair(r.scale, 1.0);
    if (r.kind == SequenceRule::Kind::geometric) return std::make_pair(r.scale, r.ratio);
    return std::nullopt;
}

} // namespace detail

inline C2dSum c2d_sum(const SkMatrix& m) {
    C2dSum out;
    auto term = [&](long l) {
        const complex c = m.c(l);
        return c == complex{} ? 0.0 : std::norm(c) / m.d(l);
    };
    const long tail = m.tail_length();
    const long c_end = m.c_rule.support_end();
    if (tail != LONG_MAX || c_end != LONG_MAX) {
        const long end = std::min(tail, c_end);
        for (long l = 1; l <= end; ++l) out.value += term(l);
        out.explicit_terms = end;
        out.closed_form = true;
        out.remainder = 2.0 * kUnitRoundoff * static_cast<double>(end) * out.value;
        return out;
    }
    const auto cg = detail::geometric_form(m.c_rule);
    const auto dg = detail::geometric_form(m.d_rule);
    if (cg && dg) {
        const double q = cg->second * cg->second / dg->second;
        if (!(q < 1.0)) throw error(errc::uncertifiable, "sum of |c|^2/d diverges: ratio " + std::to_string(q));
        out.value = std::norm(cg->first) / dg->first.real() * q / (1.0 - q);
        for (const auto& [l, delta] : m.d_adjust) {
            out.value += std::norm(m.c(l)) * (1.0 / m.d(l) - 1.0 / m.d_rule(l).real());
        }
        out.closed_form = true;
        out.remainder = 16.0 * kUnitRoundoff * out.value;
        return out;
    }
    // Explicit prefix, then a tail bound from the c envelope and a lower envelope of d.
    const auto lower = m.d_rule.lower_envelope();
    if (!lower) throw error(errc::uncertifiable, "no lower bound on d; (C2) cannot be certified");
    const GrowthEnvelope ce = m.c_rule.envelope();
    constexpr long L = 100000;
    long last = L;
    if (!m.d_adjust.empty()) last = std::max(last, m.d_adjust.rbegin()->first);
    for (long l = 1; l <= last; ++l) out.value += term(l);
    out.explicit_terms = last;
    const double tail_bound = power_geometric_tail(ce.C * ce.C / lower->C, 2.0 * ce.alpha - lower->alpha,
                                                   ce.q * ce.q / lower->q, last + 1);
    if (!std::isfinite(tail_bound)) throw error(errc::uncertifiable, "sum of |c|^2/d is not certifiably finite");
    out.remainder = tail_bound + 2.0 * kUnitRoundoff * static_cast<double>(last) * out.value;
    return out;
}

struct SkCertificate {
    double lambda_min_b = 0.0;
    std::vector<double> eigenvalues_b;
    C2dSum c2d;
    double c2d_sum = 0.0;
    double s_value = 0.0; // lambda_min_b - k * c2d_sum
    double s_lower = 0.0; // the same with the certified remainder included
    std::vector<long> orders;
    std::vector<double> truncation_psd_trace;
};

inline SkCertificate s_of_a(const SkMatrix& m) {
    m.validate();
    SkCertificate out;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es((m.b + m.b.adjoint()) / 2.0);
    if (es.info() != Eigen::Success) throw error(errc::internal_check, "eigen-solve of b failed");
    for (long i = 0; i < m.k; ++i) out.eigenvalues_b.push_back(es.eigenvalues()(i));
    out.lambda_min_b = out.eigenvalues_b.front();
    const double norm_b = std::max(std::abs(out.eigenvalues_b.front()), std::abs(out.eigenvalues_b.back()));
    if (out.lambda_min_b < -1e-12 * (1.0 + norm_b)) {
        throw error(errc::hypothesis_failed, "b is not positive semi-definite");
    }
    out.c2d = c2d_sum(m);
    out.c2d_sum = out.c2d.value;
    const double k = static_cast<double>(m.k);
    out.s_value = out.lambda_min_b - k * out.c2d_sum;
    out.s_lower = out.s_value - k * out.c2d.remainder - 8.0 * kUnitRoundoff * (1.0 + norm_b);
    return out;
}

/// One step of the Schur chain g_j = b - S_j * ones(k, k).
struct SchurStep {
    long j = 0;
    double S_j = 0.0;
    double lambda_min = 0.0;  // lambda_min(g_j), direct
    double weyl_lower = 0.0;  // lambda_min(b) - k S_j
};

struct SkPsdReport {
    SkCertificate sk;
    PsdCertificate ladder;
    std::vector<SchurStep> schur;
    bool schur_certified = false;
    std::string note;
};

inline std::vector<SchurStep> schur_chain(const SkMatrix& m, long steps, double lambda_min_b) {
    std::vector<SchurStep> out;
    const Eigen::MatrixXcd ones = Eigen::MatrixXcd::Ones(m.k, m.k);
    double S = 0.0;
    for (long j = 1; j <= steps; ++j) {
        const complex c = m.c(j);
        if (c != complex{}) S += std::norm(c) / m.d(j);
        SchurStep st;
        st.j = j;
        st.S_j = S;
        st.lambda_min = hermitian_spectrum(m.b - S * ones).min_eigenvalue;
        st.weyl_lower = lambda_min_b - static_cast<double>(m.k) * S;
        out.push_back(st);
    }
    return out;
}

/// Schur-complement certificate when s(a) >= 0, always cross-checked by the eigen ladder.
inline SkPsdReport certify_psd_sk(const SkMatrix& m, long max_order, double tol = 1e-9) {
    SkPsdReport rep;
    rep.sk = s_of_a(m);
    const CoefficientMatrix a = CoefficientMatrix::arrowhead(m);
    rep.ladder = psd_check(a, max_order, tol);
    rep.sk.orders = rep.ladder.orders;
    rep.sk.truncation_psd_trace = rep.ladder.min_eigenvalues;
    const long steps = std::max(0L, std::min(max_order, m.order()) - m.k);
    rep.schur = schur_chain(m, steps, rep.sk.lambda_min_b);
    const double scale = 1.0 + std::abs(rep.sk.lambda_min_b) + static_cast<double>(m.k) * rep.sk.c2d_sum;
    for (const SchurStep& st : rep.schur) {
        if (st.lambda_min < st.weyl_lower - 1e-10 * scale) {
            throw error(errc::internal_check, "Weyl inequality violated at step " + std::to_string(st.j));
        }
    }
    rep.schur_certified = rep.sk.s_lower >= 0.0 || (rep.sk.s_value >= 0.0 && rep.sk.c2d.closed_form);
    if (rep.schur_certified) {
        if (!rep.ladder.psd()) {
            throw error(errc::internal_check, "Schur certificate and eigen ladder disagree at order " +
                                                  std::to_string(rep.ladder.witness_order));
        }
        rep.note = "PSD certified by the Schur complement chain; eigen ladder agrees";
    } else {
        rep.note = rep.ladder.psd() ? "Schur certificate inconclusive (s < 0); eigen ladder PSD up to order"
                                    : "Schur certificate inconclusive (s < 0); eigen ladder found a negative section";
    }
    return rep;
}

inline double sk_margin(const SkCertificate& c) { return c.c2d.closed_form ? c.s_value : c.s_lower; }

/// The matrix a - eps e_idx.
inline SkMatrix perturbed(const SkMatrix& m, long idx, double eps) {
    SkMatrix out = m;
    if (idx <= m.k) {
        out.b(idx - 1, idx - 1) -= eps;
    } else {
        out.d_adjust[idx - m.k] -= eps;
    }
    return out;
}

/// Certifies a - eps e_idx via the inequality chain and the eigen ladder.
inline bool perturbation_psd(const SkMatrix& m, long idx, double eps, long max_order, double tol = 1e-9) {
    if (idx < 1) throw error(errc::out_of_range, "index must be positive");
    const SkCertificate c = s_of_a(m);
    const double s = sk_margin(c);
    if (s < 0.0) throw error(errc::hypothesis_failed, "perturbation needs s(a) >= 0");
    if (eps < 0.0 || eps > s * (1.0 + 1e-12) + 1e-15) {
        throw error(errc::out_of_range, "eps must lie in [0, s(a)]");
    }
    if (idx > m.k && eps != 0.0) throw error(errc::out_of_range, "only eps = 0 is covered for idx > k");
    if (eps == 0.0) return certify_psd_sk(m, max_order, tol).ladder.psd();
    const SkMatrix p = perturbed(m, idx, eps);
    // lambda_min(b - eps e_idx) - k sum >= s(a) - eps >= 0.
    const CoefficientMatrix a = CoefficientMatrix{p};
    const PsdCertificate ladder = psd_check(a, max_order, tol);
    if (!ladder.psd()) {
        throw error(errc::internal_check, "inequality chain certifies PSD but the eigen ladder fails at order " +
                                              std::to_string(ladder.witness_order));
    }
    return true;
}

struct EpsilonSearch {
    double eps = 0.0;
    std::optional<double> eps_max; // feasible interval (0, eps_max) when idx > k
    double s_after = 0.0;
};

/// A positive eps with s(a - eps e_idx) > 0.
inline EpsilonSearch epsilon_m_search(const SkMatrix& m, long idx, long ladder_order = 16) {
    if (idx < 1) throw error(errc::out_of_range, "index must be positive");
    const SkCertificate c = s_of_a(m);
    const double s = sk_margin(c);
    if (!(s > 0.0)) throw error(errc::hypothesis_failed, "epsilon search needs s(a) > 0");
    EpsilonSearch out;
    if (idx <= m.k) {
        out.eps = s / 2.0;
        const SkMatrix p = perturbed(m, idx, out.eps);
        out.s_after = sk_margin(s_of_a(p));
        if (!(out.s_after > 0.0) || !psd_check(CoefficientMatrix{p}, ladder_order).psd()) {
            throw error(errc::internal_check, "perturbed margin failed re-verification");
        }
        return out;
    }
    const long l = idx - m.k;
    if (l > m.tail_length()) throw error(errc::out_of_range, "index beyond the matrix order");
    const complex cm = m.c(l);
    const double dm = m.d(l);
    if (cm == complex{}) {
        out.eps = dm / 2.0;
        out.eps_max = dm;
    } else {
        // s + k|c|^2 (1/d - 1/(d - eps)) > 0  <=>  eps < d - 1 / (1/d + s / (k |c|^2)).
        const double e_max = dm - 1.0 / (1.0 / dm + s / (static_cast<double>(m.k) * std::norm(cm)));
        out.eps_max = e_max;
        out.eps = e_max / 2.0;
    }
    const SkMatrix p = perturbed(m, idx, out.eps);
    out.s_after = sk_margin(s_of_a(p));
    if (!(out.s_after > 0.0)) throw error(errc::internal_check, "perturbed margin failed re-verification");
    return out;
}

struct GrowthReport {
    bool ok = false;
    double C = 0.0;
    bool asymptotic_ok = false;
};

/// d_l <= C l^{rho-1} for matrix indices k < l <= l_max, with the rule confirming the rate.
inline GrowthReport growth_check(const SkMatrix& m, double rho, long l_max) {
    if (!(rho > 1.0)) throw error(errc::malformed_input, "growth check needs rho > 1");
    GrowthReport r;
    const long end = std::min(l_max, m.order());
    for (long l = m.k + 1; l <= end; ++l) {
        r.C = std::max(r.C, m.d(l - m.k) / std::pow(static_cast<double>(l), rho - 1.0));
    }
    switch (m.d_rule.kind) {
    case SequenceRule::Kind::constant: r.asymptotic_ok = true; break;
    case SequenceRule::Kind::geometric: r.asymptotic_ok = m.d_rule.ratio <= 1.0; break;
    case SequenceRule::Kind::power: r.asymptotic_ok = m.d_rule.exponent <= rho - 1.0; break;
    case SequenceRule::Kind::list: r.asymptotic_ok = true; break;
    }
    r.ok = r.asymptotic_ok && std::isfinite(r.C);
    return r;
}

struct ExampleStep {
    long j = 0;
    double S_j = 0.0;
    double S_closed = 0.0; // (1/3)(1 - 4^{-j})
    double trace = 0.0;
    double det = 0.0;
};

struct WorkedExampleReport {
    SkMatrix matrix;
    std::vector<double> eigenvalues_b;
    double c2d_sum = 0.0;
    double s_value = 0.0;
    std::vector<ExampleStep> steps;
    bool all_positive = false;
    PsdCertificate ladder;
};

/// The arrowhead with b = [[1/2, 1/sqrt 6], [1/sqrt 6, 2/3]], c = 1, d_{2+l} = 4^l.
inline SkMatrix example_sk_matrix() {
    SkMatrix m;
    m.k = 2;
    m.b.resize(2, 2);
    const double r6 = 1.0 / std::sqrt(6.0);
    m.b << 0.5, r6, r6, 2.0 / 3.0;
    m.c_rule = SequenceRule::constant(1.0);
    m.d_rule = SequenceRule::geometric(1.0, 4.0);
    return m;
}

inline WorkedExampleReport paper_example(long steps = 20, long ladder_order = 16) {
    WorkedExampleReport rep;
    rep.matrix = example_sk_matrix();
    const SkCertificate c = s_of_a(rep.matrix);
    rep.eigenvalues_b = c.eigenvalues_b;
    rep.c2d_sum = c.c2d_sum;
    rep.s_value = c.s_value;
    const double r6 = 1.0 / std::sqrt(6.0);
    double S = 0.0;
    rep.all_positive = true;
    for (long j = 1; j <= steps; ++j) {
        S += 1.0 / rep.matrix.d(j);
        ExampleStep st;
        st.j = j;
        st.S_j = S;
        st.S_closed = (1.0 - std::pow(4.0, -static_cast<double>(j))) / 3.0;
        st.trace = 0.5 + 2.0 / 3.0 - 2.0 * S;
        st.det = (0.5 - S) * (2.0 / 3.0 - S) - (r6 - S) * (r6 - S);
        rep.all_positive = rep.all_positive && st.trace > 0.0 && st.det > 0.0;
        rep.steps.push_back(st);
    }
    rep.ladder = psd_check(CoefficientMatrix::arrowhead(rep.matrix), ladder_order);
    return rep;
}

} // namespace dsk
