// Acceptance suite: one PASS/FAIL line per criterion.

#include "dsk/dsk.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace dsk;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            if (pass) detail << "first failure: " << what << "; ";
            pass = false;
        }
    }
};

Eigen::MatrixXcd gaussian(std::mt19937_64& rng, int rows, int cols) {
    std::normal_distribution<double> g;
    Eigen::MatrixXcd B(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) B(i, j) = {g(rng), g(rng)};
    return B;
}

Eigen::MatrixXcd random_psd(std::mt19937_64& rng, int n) {
    const Eigen::MatrixXcd B = gaussian(rng, n, n);
    return B * B.adjoint() / double(n);
}

double min_eig(const Eigen::MatrixXcd& a) { return hermitian_spectrum(a).min_eigenvalue; }

// 1. The worked arrowhead example.
void worked_example_reproduction(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    const WorkedExampleReport r = paper_example(20, 16);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(std::abs(r.eigenvalues_b[0] - 1.0 / 6.0) <= 1e-12 && std::abs(r.eigenvalues_b[1] - 1.0) <= 1e-12,
              "eigenvalues of b");
    o.require(std::abs(r.c2d_sum - 1.0 / 3.0) <= 1e-12, "sum 4^{-l}");
    o.require(std::abs(r.s_value + 0.5) <= 1e-12, "s(a) = -1/2");
    for (const ExampleStep& st : r.steps) {
        o.require(std::abs(st.S_j - (1.0 - std::pow(4.0, -double(st.j))) / 3.0) <= 1e-12, "S_j closed form");
        o.require(st.det > 0.0, "det g_j > 0");
    }
    o.require(r.steps.size() == 20, "20 Schur steps");
    double ladder_min = kInf;
    for (double e : r.ladder.min_eigenvalues) ladder_min = std::min(ladder_min, e);
    o.require(r.ladder.psd() && ladder_min >= -1e-9, "PSD ladder to order 16");
    o.require(secs < 1.0, "runtime < 1 s");
    o.detail << "lambda(b) = {" << r.eigenvalues_b[0] << ", " << r.eigenvalues_b[1] << "}, s = " << r.s_value
             << ", ladder min = " << ladder_min << ", " << secs << " s";
}

// 2. Structural PSD verdict against sampled kernel Gram matrices.
void psd_equivalence(Outcome& o) {
    std::mt19937_64 rng(2002);
    std::uniform_real_distribution<double> re(2.01, 2.3), im(-40.0, 40.0), neg(0.1, 1.0);
    int matches = 0;
    const int total = 200;
    for (int t = 0; t < total; ++t) {
        Eigen::MatrixXcd a;
        const bool make_psd = t % 2 == 0;
        if (make_psd) {
            a = random_psd(rng, 6);
        } else {
            // Q diag(lambda) Q* with one planted negative eigenvalue.
            Eigen::HouseholderQR<Eigen::MatrixXcd> qr(gaussian(rng, 6, 6));
            const Eigen::MatrixXcd Q = qr.householderQ();
            Eigen::VectorXd lam(6);
            for (int i = 0; i < 6; ++i) lam(i) = std::abs(re(rng)) - 2.0 + 0.1 * i;
            lam(0) = -neg(rng) * lam.maxCoeff();
            a = Q * lam.cast<complex>().asDiagonal() * Q.adjoint();
            a = (a + a.adjoint()) / 2.0;
        }
        const DirichletKernel k{CoefficientMatrix::dense(a), HalfPlane{2.0}};
        const bool structural = psd_check(k.matrix, 6, 1e-8).psd();
        std::vector<complex> pts;
        for (int i = 0; i < 8; ++i) pts.push_back({re(rng), im(rng)});
        Eigen::MatrixXcd G(8, 8);
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) G(i, j) = kernel_eval(k, pts[i], pts[j], 6).value;
        const SectionSpectrum sp = hermitian_spectrum(G);
        const bool sampled = sp.min_eigenvalue >= -1e-8 * (1.0 + sp.norm);
        if (structural == sampled && structural == make_psd) ++matches;
    }
    o.require(matches == total, "verdicts disagree");
    o.detail << matches << "/" << total << " agree";
}

// 3. Tail-bound soundness on random enveloped kernels.
void tail_soundness(Outcome& o) {
    std::mt19937_64 rng(3003);
    std::uniform_real_distribution<double> al(-1.0, 1.0), sc(0.2, 2.0), dx(0.5, 2.0), im(-10.0, 10.0),
        ph(0.0, 6.283185307179586);
    int ok = 0;
    const int total = 50;
    for (int t = 0; t < total; ++t) {
        const double alpha = al(rng);
        const complex scale = std::polar(sc(rng), ph(rng));
        CoefficientMatrix a;
        double abscissa = 0.0; // the row and column sums converge for Re > abscissa
        switch (t % 4) {
        case 0: a = CoefficientMatrix::diagonal(Sequence{SequenceRule::power(std::abs(scale), alpha)}); abscissa = (alpha + 1.0) / 2.0; break;
        case 1: a = CoefficientMatrix::rank_one(Sequence{SequenceRule::power(scale, alpha)}); abscissa = alpha + 1.0; break;
        case 2: {
            const Sequence off{SequenceRule::power(scale, alpha)};
            a = CoefficientMatrix::banded(1, {conjugated(off), Sequence{SequenceRule::power(2.0 * std::abs(scale), alpha)}, off});
            abscissa = (alpha + 1.0) / 2.0 + 0.5;
            break;
        }
        default: {
            SkMatrix m;
            m.k = 2;
            m.b = random_psd(rng, 2);
            m.c_rule = SequenceRule::power(scale, alpha);
            m.d_rule = SequenceRule::power(1.0, alpha + 1.0);
            a = CoefficientMatrix::arrowhead(m);
            abscissa = alpha + 2.0;
            break;
        }
        }
        const DirichletKernel k{a, HalfPlane{abscissa}};
        const complex s{abscissa + dx(rng), im(rng)}, u{abscissa + dx(rng), im(rng)};
        bool all = true;
        for (long M : {100L, 1000L}) {
            const ValueWithBound lo = kernel_eval(k, s, u, M);
            const ValueWithBound hi = kernel_eval(k, s, u, 10 * M);
            const double diff = std::abs(hi.value - lo.value);
            all = all && std::isfinite(lo.error_radius) && diff <= lo.error_radius;
        }
        if (all) ++ok;
    }
    o.require(ok == total, "a difference exceeded its radius");
    o.detail << ok << "/" << total << " kernels, M in {100, 1000}";
}

// 4. Coefficient recovery from kernel values.
void recovery_round_trip(Outcome& o) {
    std::mt19937_64 rng(4004);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const int n = 1 + t % 6;
        const Eigen::MatrixXcd a = random_psd(rng, n);
        const DirichletKernel k{CoefficientMatrix::dense(a), HalfPlane{0.0}};
        CoefficientRecoverer r = kernel_recoverer(k, n);
        for (int i = 1; i <= std::min(n, 4); ++i)
            for (int j = 1; j <= std::min(n, 4); ++j) worst = std::max(worst, std::abs(r.recover(i, j) - a(i - 1, j - 1)));
    }
    o.require(worst <= 1e-6, "entry error above 1e-6");
    o.detail << "max entry error " << worst << " over 20 matrices of order 1..6";
}

// 5. Merged exponents and the merged product.
void merge_criterion(Outcome& o) {
    const auto v = merge_log_exponents(std::sqrt(2.0), 50, 50);
    double gap = kInf;
    for (std::size_t i = 1; i < v.size(); ++i) gap = std::min(gap, v[i].nu - v[i - 1].nu);
    o.require(v.size() == 2500 && gap > 1e-9, "2500 values with gap > 1e-9");

    GeneralDirichletSeries f, g;
    f.coefficients = Sequence{SequenceRule::power(1.0, -0.5)};
    f.exponent_rule = ExponentRule::log_scaled(1.0);
    g.coefficients = Sequence{SequenceRule::geometric(1.0, 0.9)};
    g.exponent_rule = ExponentRule::log_scaled(std::sqrt(2.0));
    const GeneralDirichletSeries p = multiply_merged(truncate(f, 50), truncate(g, 50));
    std::mt19937_64 rng(5005);
    std::uniform_real_distribution<double> re(2.0, 4.0), im(-10.0, 10.0);
    double worst = -kInf;
    for (int t = 0; t < 10; ++t) {
        const complex s{re(rng), im(rng)};
        const ValueWithBound fg = evaluate(f, s, 50) * evaluate(g, s, 50);
        const ValueWithBound ps = evaluate(p, s, 2500);
        const double excess = std::abs(ps.value - fg.value) - (fg.total_radius() + ps.total_radius());
        worst = std::max(worst, excess);
        o.require(excess <= 0.0, "product outside combined error");
    }
    bool collided = false;
    try {
        merge_log_exponents(1.0, 2, 2);
    } catch (const error& e) {
        collided = e.code() == errc::collision;
    }
    o.require(collided, "omega = 1 must collide");
    o.detail << v.size() << " values, min gap " << gap << ", worst excess " << worst << ", omega=1 collision "
             << (collided ? "raised" : "missing");
}

// 6. Quasi-invariance classification.
void classification(Outcome& o) {
    std::mt19937_64 rng(6006);
    std::uniform_real_distribution<double> x(-1.0, 1.0), w(0.1, 2.0);
    std::uniform_int_distribution<int> len(2, 6);
    int errors = 0;
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const int L = len(rng);
        CoefficientMatrix a;
        const bool rank_one = t % 2 == 0;
        if (rank_one) {
            // |f(1)| exceeds the sum of the rest, so f has no zeros for Re(s) > 0.
            std::vector<complex> f(static_cast<std::size_t>(L));
            double rest = 0.0;
            for (int i = 1; i < L; ++i) {
                f[static_cast<std::size_t>(i)] = {x(rng), x(rng)};
                rest += std::abs(f[static_cast<std::size_t>(i)]);
            }
            f[0] = std::polar(rest + w(rng), 3.0 * x(rng));
            a = CoefficientMatrix::rank_one(Sequence{f});
        } else {
            std::vector<complex> d(static_cast<std::size_t>(L));
            for (auto& v : d) v = w(rng);
            a = CoefficientMatrix::diagonal(Sequence{d});
        }
        const DirichletKernel k{a, HalfPlane{0.0}};
        const QuasiInvarianceReport r = quasi_invariance_classify(k, 6, 1e-8, default_classification_grid(0.0));
        if (r.quasi_invariant() != rank_one) ++errors;
        if (rank_one && r.factor) {
            const Eigen::MatrixXcd A = a.truncation(6);
            const Eigen::VectorXcd& f = *r.factor;
            for (int m = 0; m < 6; ++m)
                for (int n = 0; n < 6; ++n) worst = std::max(worst, std::abs(A(m, n) - f(m) * std::conj(f(n))));
        }
    }
    o.require(errors == 0, "misclassified matrices");
    o.require(worst < 1e-8, "factor residual >= 1e-8");
    o.detail << errors << " errors in 100, max factor residual " << worst;
}

// 7. Translation invariance verdicts.
void translation(Outcome& o) {
    std::mt19937_64 rng(7007);
    std::uniform_real_distribution<double> w(0.1, 2.0);
    std::uniform_int_distribution<int> len(2, 6);
    int agree = 0;
    int witnessed = 0, off_diagonal = 0;
    double weakest = kInf;
    for (int t = 0; t < 100; ++t) {
        const int L = len(rng);
        CoefficientMatrix a;
        const bool diagonal = t % 2 == 0;
        if (diagonal) {
            std::vector<complex> d(static_cast<std::size_t>(L));
            for (auto& v : d) v = w(rng);
            a = CoefficientMatrix::diagonal(Sequence{d});
        } else if (t % 4 == 1) {
            a = CoefficientMatrix::dense(random_psd(rng, L));
        } else {
            const Eigen::MatrixXcd f = gaussian(rng, L, 1);
            a = CoefficientMatrix::rank_one(Sequence{std::vector<complex>(f.data(), f.data() + L)});
        }
        const DirichletKernel k{a, HalfPlane{0.0}};
        const TranslationReport r = translation_invariance_test(k, L, 1e-9);
        if (r.invariant == diagonal && r.numeric_agrees) ++agree;
        if (!diagonal) {
            ++off_diagonal;
            if (r.witness && r.witness->violation > 1e-6) {
                ++witnessed;
                weakest = std::min(weakest, r.witness->violation);
            }
        }
    }
    o.require(agree == 100, "verdict disagreement");
    o.require(witnessed == off_diagonal, "non-diagonal case without a witness above 1e-6");
    o.detail << agree << "/100 agree, " << witnessed << "/" << off_diagonal << " witnesses, weakest violation "
             << weakest;
}

// 8. Exact homogeneity on random rational pairs.
void homogeneity(Outcome& o) {
    std::mt19937_64 rng(8008);
    std::uniform_int_distribution<std::int64_t> num(-10000, 10000), den(1, 997);
    int nonzero = 0;
    for (int t = 0; t < 1000; ++t) {
        if (!homogeneity_verify(Rational{num(rng), den(rng)}, Rational{num(rng), den(rng)}).is_zero()) ++nonzero;
    }
    o.require(nonzero == 0, "nonzero residual");
    o.detail << nonzero << " nonzero residuals in 1000 pairs";
}

// 9. Independence of kernel translates.
void translate_independence(Outcome& o) {
    std::mt19937_64 rng(9009);
    std::uniform_int_distribution<std::int64_t> num(-1000, 1000);
    std::set<std::int64_t> picked;
    while (picked.size() < 4) picked.insert(num(rng));
    TranslateSpan span;
    for (std::int64_t p : picked) span.offsets.push_back(Rational{p, 100});
    span.order = 4'000'000;
    const GramReport g = translate_gram(span);
    const double zeta2 = 1.6449340668482264;
    o.require(g.min_eigenvalue > 0.0, "Gram min eigenvalue");
    o.require(std::abs(g.G(0, 0).real() - zeta2) <= 1e-6, "G_11 vs zeta(2)");
    o.detail << "offsets";
    for (const Rational& b : span.offsets) o.detail << " " << b.str();
    o.detail << ", min eigenvalue " << g.min_eigenvalue << ", |G_11 - zeta(2)| = " << std::abs(g.G(0, 0).real() - zeta2)
             << " at M = " << span.order;
}

// 10. The weighted summability identity.
void mdelta_identity(Outcome& o) {
    TranslateSpan span;
    for (long M : {1000L, 10000L}) {
        const MdeltaReport r = mdelta_check(span, std::nullopt, 0.25, M);
        o.require(r.finite && r.kernel_value.has_value() && r.identity_ok, "identity at M = " + std::to_string(M));
        o.detail << "M=" << M << ": sum " << r.partial_sum << " vs kernel " << r.kernel_value.value_or(NAN) << ", residual "
                 << r.identity_residual << " <= " << r.identity_bound << "; ";
    }
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<void(Outcome&)> run;
    };
    const Criterion criteria[] = {
        {"worked example reproduction", worked_example_reproduction},
        {"PSD equivalence property", psd_equivalence},
        {"tail-bound soundness", tail_soundness},
        {"coefficient recovery round-trip", recovery_round_trip},
        {"merged exponents and product", merge_criterion},
        {"quasi-invariance classification", classification},
        {"translation invariance", translation},
        {"exact homogeneity", homogeneity},
        {"translate independence", translate_independence},
        {"weighted summability identity", mdelta_identity},
    };
    int failures = 0;
    int index = 0;
    for (const Criterion& c : criteria) {
        ++index;
        Outcome o;
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "exception: " << e.what();
        }
        if (!o.pass) ++failures;
        std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", index, c.name, o.detail.str().c_str());
    }
    std::printf("%d of 10 criteria passed\n", 10 - failures);
    return failures == 0 ? 0 : 1;
}
