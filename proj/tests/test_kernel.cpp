#include "dsk/kernel.hpp"
#include "dsk/structured_psd.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace dsk;

namespace {

DirichletKernel diag_ones(double rho = 0.5) {
    return {CoefficientMatrix::diagonal(Sequence{SequenceRule::constant(1.0)}), HalfPlane{rho}};
}

long double zeta_sum(double s, long n_max) {
    long double sum = 0.0L;
    for (long n = n_max; n >= 1; --n) sum += std::pow(static_cast<long double>(n), -static_cast<long double>(s));
    return sum;
}

Eigen::MatrixXcd random_psd(std::mt19937_64& rng, int n, int rank) {
    std::normal_distribution<double> g;
    Eigen::MatrixXcd B(n, rank);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < rank; ++j) B(i, j) = {g(rng), g(rng)};
    return B * B.adjoint();
}

} // namespace

TEST(KernelEval, DiagonalOnesIsZetaFour) {
    const ValueWithBound v = kernel_eval(diag_ones(), 2.0, 2.0, 1000);
    const double oracle = static_cast<double>(zeta_sum(4.0, 10'000'000));
    EXPECT_NEAR(v.value.real(), 1.0823232, 1e-7);
    EXPECT_LE(std::abs(v.value.real() - oracle), v.total_radius());
    EXPECT_LT(v.error_radius, 1e-8);
}

TEST(KernelEval, ZeroMatrix) {
    const ValueWithBound v = kernel_eval({CoefficientMatrix::zero(), HalfPlane{0.0}}, {1.0, 2.0}, {3.0, -1.0}, 10);
    EXPECT_EQ(v.value, complex{});
    EXPECT_EQ(v.error_radius, 0.0);
}

TEST(KernelEval, RankOneUnitVector) {
    const DirichletKernel k{CoefficientMatrix::rank_one(Sequence{std::vector<complex>{0.0, 1.0}}), HalfPlane{0.0}};
    const ValueWithBound v = kernel_eval(k, 1.0, 1.0, 10);
    EXPECT_NEAR(v.value.real(), 0.25, 1e-16);
    EXPECT_EQ(v.error_radius, 0.0);
    // 2^{-s - conj(u)} off the real axis.
    const complex s{1.0, 2.0}, u{1.5, -0.5};
    EXPECT_LT(std::abs(kernel_eval(k, s, u, 10).value - std::pow(2.0, -(s + std::conj(u)))), 1e-15);
}

TEST(KernelEval, RefusesOutsideDomain) {
    EXPECT_THROW(kernel_eval(diag_ones(0.5), 0.5, 2.0, 10), error);
}

TEST(KernelEval, OpenTailNeedsEnvelope) {
    CoefficientMatrix a = CoefficientMatrix::dense(Eigen::MatrixXcd::Identity(3, 3));
    a.open_tail = true;
    const DirichletKernel k{a, HalfPlane{1.0}};
    EXPECT_FALSE(kernel_eval(k, 3.0, 3.0, 3).certified());
    DirichletKernel with{a, HalfPlane{1.0}};
    with.matrix.envelope = GrowthEnvelope{1.0, 0.0, 1.0};
    EXPECT_TRUE(kernel_eval(with, 3.0, 3.0, 3).certified());
}

TEST(KernelEval, HermitianSymmetry) {
    std::mt19937_64 rng(5);
    const DirichletKernel k{CoefficientMatrix::dense(random_psd(rng, 5, 5)), HalfPlane{0.0}};
    const complex s{1.2, 0.7}, u{0.4, -2.0};
    EXPECT_LT(std::abs(kernel_eval(k, s, u, 5).value - std::conj(kernel_eval(k, u, s, 5).value)), 1e-13);
}

TEST(TailBound, DecaysWithArgument) {
    const DirichletKernel k = diag_ones();
    double prev = kInf;
    for (double p : {4.0, 6.0, 10.0, 20.0, 40.0}) {
        const double b = tail_bound(k, 1, 1, p, p, 2.0);
        EXPECT_LT(b, prev);
        prev = b;
    }
    EXPECT_LT(prev, 1e-9);
}

TEST(TailBound, FiniteOrderOneIsZero) {
    const DirichletKernel k{CoefficientMatrix::dense(Eigen::MatrixXcd::Constant(1, 1, 2.0)), HalfPlane{0.0}};
    EXPECT_EQ(tail_bound(k, 1, 1, 3.0, 3.0, 2.0), 0.0);
}

TEST(TailBound, DominatesExactTail) {
    const double exact = static_cast<double>(zeta_sum(10.0, 100'000)) - 1.0;
    EXPECT_NEAR(exact, 9.945751278e-4, 1e-12);
    EXPECT_GE(tail_bound(diag_ones(), 1, 1, 5.0, 5.0, 2.0), exact);
}

TEST(TailBound, RefusesSmallR) {
    EXPECT_THROW(tail_bound(diag_ones(0.5), 1, 1, 5.0, 5.0, 1.5), error);
}

TEST(TailBound, SoundOnRandomPoints) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> re(3.0, 8.0), im(-5.0, 5.0);
    const DirichletKernel k = diag_ones();
    for (int t = 0; t < 30; ++t) {
        const complex s{re(rng), im(rng)}, u{re(rng), im(rng)};
        const long kk = 1 + t % 3;
        // k^{s + conj(u)} sum_{n >= k} n^{-s - conj(u)} - 1 = sum_{n > k} (k/n)^{s + conj(u)}.
        complex tail{};
        for (long n = 100'000; n > kk; --n) tail += std::pow(double(kk) / double(n), s + std::conj(u));
        EXPECT_LE(std::abs(tail), tail_bound(k, kk, kk, s, u, 2.0)) << "s=" << s << " u=" << u;
    }
}

TEST(SelfAdjoint, Examples) {
    EXPECT_TRUE(self_adjoint_check(CoefficientMatrix::diagonal(Sequence{SequenceRule::power(1.0, -2.0)}), 20, 0.0));
    Eigen::MatrixXcd a(2, 2);
    a << 1.0, complex{0, 1}, complex{0, 1}, 1.0;
    EXPECT_FALSE(self_adjoint_check(CoefficientMatrix::dense(a), 2, 1e-12));
    EXPECT_TRUE(self_adjoint_check(CoefficientMatrix::arrowhead(example_sk_matrix()), 30, 0.0));
}

TEST(PsdCheck, Examples) {
    EXPECT_TRUE(psd_check(CoefficientMatrix::diagonal(Sequence{SequenceRule::power(1.0, -2.0)}), 32).psd());
    Eigen::MatrixXcd a(2, 2);
    a << 1.0, 2.0, 2.0, 1.0;
    const PsdCertificate c = psd_check(CoefficientMatrix::dense(a), 2);
    EXPECT_FALSE(c.psd());
    EXPECT_EQ(c.witness_order, 2);
    EXPECT_NEAR(c.min_eigenvalues.back(), -1.0, 1e-12);
    EXPECT_NEAR(c.witness_value, -1.0, 1e-12);
    EXPECT_TRUE(psd_check(CoefficientMatrix::arrowhead(example_sk_matrix()), 14).psd());
    a(0, 1) = complex{2.0, 1.0};
    EXPECT_THROW(psd_check(CoefficientMatrix::dense(a), 2), error);
}

TEST(PsdCheck, LadderShape) {
    EXPECT_EQ(psd_ladder(16), (std::vector<long>{2, 4, 8, 16}));
    EXPECT_EQ(psd_ladder(14), (std::vector<long>{2, 4, 8, 14}));
    EXPECT_EQ(psd_ladder(1), (std::vector<long>{1}));
}

// Property: the structural verdict agrees with sampled kernel Gram matrices.
TEST(PsdCheck, AgreesWithSampledGram) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> re(2.5, 4.0), im(-3.0, 3.0);
    for (int t = 0; t < 20; ++t) {
        Eigen::MatrixXcd a = random_psd(rng, 4, 4);
        if (t % 2) a -= 3.0 * a.norm() * Eigen::VectorXcd::Unit(4, 1) * Eigen::VectorXcd::Unit(4, 1).adjoint();
        const DirichletKernel k{CoefficientMatrix::dense(a), HalfPlane{2.0}};
        EXPECT_EQ(psd_check(k.matrix, 4).psd(), t % 2 == 0);
        std::vector<complex> pts;
        for (int i = 0; i < 4; ++i) pts.push_back({re(rng), im(rng)});
        Eigen::MatrixXcd G(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) G(i, j) = kernel_eval(k, pts[i], pts[j], 4).value;
        // With 4 generic points the sampled Gram is congruent to a.
        const double lam = hermitian_spectrum(G).min_eigenvalue;
        EXPECT_EQ(lam >= -1e-10 * hermitian_spectrum(G).norm, t % 2 == 0);
    }
}

TEST(Bandwidth, Examples) {
    EXPECT_EQ(bandwidth_detect(CoefficientMatrix::diagonal(Sequence{SequenceRule::constant(1.0)}), 10, 0.0), 0L);
    const Sequence ones{SequenceRule::constant(1.0)};
    EXPECT_EQ(bandwidth_detect(CoefficientMatrix::banded(1, {ones, ones, ones}), 10, 0.0), 1L);
    const CoefficientMatrix r = CoefficientMatrix::rank_one(ones);
    for (long order : {2L, 5L, 12L}) EXPECT_FALSE(bandwidth_detect(r, order, 0.0).has_value());
}
