#include "dsk/recovery.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace dsk;

namespace {

DirichletKernel diag_ones() { return {CoefficientMatrix::diagonal(Sequence{SequenceRule::constant(1.0)}), HalfPlane{0.5}}; }

Eigen::MatrixXcd random_psd(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g;
    Eigen::MatrixXcd B(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) B(i, j) = {g(rng), g(rng)};
    return B * B.adjoint() / double(n);
}

} // namespace

TEST(Recovery, DiagonalOnesLeadingEntry) {
    EXPECT_NEAR(std::abs(coefficient_recover(diag_ones(), 1, 1, 4) - 1.0), 0.0, 1e-8);
}

TEST(Recovery, DiagonalOnesOffDiagonal) {
    CoefficientRecoverer r = kernel_recoverer(diag_ones(), 4);
    EXPECT_LT(std::abs(r.recover(1, 2)), 1e-8);
    EXPECT_LT(std::abs(r.recover(2, 2) - 1.0), 1e-8);
    EXPECT_LT(std::abs(r.recover(2, 3)), 1e-8);
}

TEST(Recovery, ZeroKernel) {
    const DirichletKernel k{CoefficientMatrix::zero(), HalfPlane{0.0}};
    EXPECT_EQ(coefficient_recover(k, 2, 3, 4), complex{});
    const KernelEvaluator zero = [](complex, complex) { return complex{}; };
    EXPECT_EQ(coefficient_recover(zero, 0.0, 1, 1, 2), complex{});
}

TEST(Recovery, BlackBoxFiniteMatrix) {
    Eigen::MatrixXcd a(2, 2);
    a << 2.0, complex{0.5, 0.25}, complex{0.5, -0.25}, 1.0;
    const DirichletKernel k{CoefficientMatrix::dense(a), HalfPlane{0.0}};
    const KernelEvaluator eval = [&](complex s, complex u) { return kernel_eval(k, s, u, 2).value; };
    for (long m = 1; m <= 2; ++m)
        for (long n = 1; n <= 2; ++n) EXPECT_LT(std::abs(coefficient_recover(eval, 0.0, m, n, 2) - a(m - 1, n - 1)), 1e-6);
}

TEST(Recovery, RandomPsdRoundTrip) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 10; ++t) {
        const int n = 2 + t % 5;
        const Eigen::MatrixXcd a = random_psd(rng, n);
        const DirichletKernel k{CoefficientMatrix::dense(a), HalfPlane{0.0}};
        CoefficientRecoverer r = kernel_recoverer(k, n);
        for (long i = 1; i <= std::min(n, 4); ++i)
            for (long j = 1; j <= std::min(n, 4); ++j)
                EXPECT_LT(std::abs(r.recover(i, j) - a(i - 1, j - 1)), 1e-6) << "n=" << n << " (" << i << "," << j << ")";
    }
}

TEST(Recovery, RejectsIndexBeyondOrder) {
    CoefficientRecoverer r = kernel_recoverer(diag_ones(), 2);
    EXPECT_THROW(r.recover(3, 1), error);
}

TEST(Recovery, TraceSettles) {
    CoefficientRecoverer r = kernel_recoverer(diag_ones(), 3);
    const RecoveryResult res = r.recover_traced(1, 1);
    ASSERT_FALSE(res.trace.empty());
    EXPECT_LT(std::abs(res.trace.back() - res.value), 1e-8);
}
