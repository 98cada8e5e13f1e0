#include "dsk/symmetry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace dsk;

namespace {

DirichletKernel diag_ones(double rho = 0.5) {
    return {CoefficientMatrix::diagonal(Sequence{SequenceRule::constant(1.0)}), HalfPlane{rho}};
}

DirichletKernel rank_one(std::vector<complex> f, double rho = 0.0) {
    return {CoefficientMatrix::rank_one(Sequence{std::move(f)}), HalfPlane{rho}};
}

Automorphism random_aut(std::mt19937_64& rng, double rho) {
    std::uniform_real_distribution<double> x(-2.0, 2.0);
    for (;;) {
        const double a = x(rng), b = x(rng), c = x(rng);
        if (std::abs(a) < 0.2) continue;
        return Automorphism::from(a, b, c, (1.0 + b * c) / a, rho);
    }
}

} // namespace

TEST(Automorphism, Examples) {
    const complex s{1.5, 2.0};
    EXPECT_EQ(apply_automorphism(Automorphism::identity(0.5), s), s);
    EXPECT_LT(std::abs(apply_automorphism(Automorphism::translation(3.0, 0.5), s) - (s - complex{0, 3.0})), 1e-15);
    const complex t = apply_automorphism(Automorphism::scaling(2.0, 0.5), s);
    EXPECT_LT(std::abs(t - (4.0 * (s - 0.5) + 0.5)), 1e-14);
}

TEST(Automorphism, RejectsBadInput) {
    EXPECT_THROW(Automorphism::from(1.0, 1.0, 1.0, 1.0, 0.0), error);
    EXPECT_THROW(Automorphism::identity(1.0)(complex{1.0, 3.0}), error);
}

TEST(Automorphism, MapsHalfPlaneIntoItself) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> re(0.01, 5.0), im(-10.0, 10.0);
    for (int t = 0; t < 1000; ++t) {
        const Automorphism g = random_aut(rng, 0.5);
        EXPECT_GT(g(complex{0.5 + re(rng), im(rng)}).real(), 0.5);
    }
}

TEST(Automorphism, GroupLaw) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> re(0.1, 3.0), im(-5.0, 5.0);
    for (int t = 0; t < 1000; ++t) {
        const Automorphism g = random_aut(rng, 0.5), h = random_aut(rng, 0.5);
        const complex s{0.5 + re(rng), im(rng)};
        const complex lhs = compose(g, h)(s);
        const complex rhs = g(h(s));
        EXPECT_LT(std::abs(lhs - rhs), 1e-9 * (1.0 + std::abs(rhs)));
        EXPECT_LT(std::abs(g.inverse()(g(s)) - s), 1e-9 * (1.0 + std::abs(s)));
        EXPECT_NEAR(compose(g, h).det(), 1.0, 1e-9);
    }
}

TEST(Translation, DiagonalIsInvariant) {
    const TranslationReport r = translation_invariance_test(diag_ones(), 200, 1e-9);
    EXPECT_TRUE(r.invariant);
    EXPECT_TRUE(r.numeric_agrees);
    EXPECT_FALSE(r.witness);
}

TEST(Translation, ZeroKernelIsInvariant) {
    const TranslationReport r = translation_invariance_test({CoefficientMatrix::zero(), HalfPlane{0.0}}, 10, 1e-9);
    EXPECT_TRUE(r.invariant);
    EXPECT_TRUE(r.numeric_agrees);
}

TEST(Translation, OffDiagonalHasWitness) {
    const DirichletKernel k = rank_one({1.0, 1.0});
    const TranslationReport r = translation_invariance_test(k, 10, 1e-9);
    EXPECT_FALSE(r.invariant);
    ASSERT_TRUE(r.witness);
    EXPECT_TRUE(r.numeric_agrees);
    // Recompute the witness independently: kappa = (1 + 2^{-s})(1 + 2^{-conj u}).
    auto kappa = [](complex s, complex u) { return (1.0 + std::pow(2.0, -s)) * (1.0 + std::pow(2.0, -std::conj(u))); };
    const InvarianceWitness& w = *r.witness;
    const double v = std::abs(kappa(w.phi(w.s), w.phi(w.u)) - kappa(w.s, w.u));
    EXPECT_NEAR(v, w.violation, 1e-12);
    EXPECT_GT(v, 1e-6);
    // The sign-flipping shift pi/log 2 alone already breaks invariance at s = u = 1.
    const Automorphism flip = Automorphism::translation(kPi / std::log(2.0), 0.0);
    EXPECT_GT(std::abs(kappa(flip(1.0), flip(1.0)) - kappa(1.0, 1.0)), 0.5);
}

TEST(RankOneFactor, RecoversUpToPhase) {
    const std::vector<complex> f{0.5, 1.0, complex{0.0, -0.25}};
    const auto got = rank_one_factor(CoefficientMatrix::rank_one(Sequence{f}), 6);
    ASSERT_TRUE(got);
    const complex phase = (*got)(0) / f[0];
    EXPECT_NEAR(std::abs(phase), 1.0, 1e-12);
    for (int i = 0; i < 3; ++i) EXPECT_LT(std::abs((*got)(i) - phase * f[static_cast<std::size_t>(i)]), 1e-12);
}

TEST(RankOneFactor, DiagonalHasNone) {
    EXPECT_FALSE(rank_one_factor(CoefficientMatrix::dense(Eigen::MatrixXcd::Identity(2, 2)), 2));
}

TEST(RankOneFactor, ZeroMatrix) {
    const auto got = rank_one_factor(CoefficientMatrix::zero(), 4);
    ASSERT_TRUE(got);
    EXPECT_EQ(got->cwiseAbs().maxCoeff(), 0.0);
}

TEST(RankOneFactor, NegativeDefiniteRefused) {
    const Eigen::VectorXcd v = Eigen::VectorXcd::Ones(3);
    EXPECT_FALSE(rank_one_factor(CoefficientMatrix::dense(-v * v.adjoint()), 3));
}

TEST(Classify, SingleTermIsQuasiInvariant) {
    const DirichletKernel k = rank_one({0.0, 0.0, 1.5});
    const QuasiInvarianceReport r = quasi_invariance_classify(k, 8, 1e-8, default_classification_grid(0.0));
    EXPECT_TRUE(r.quasi_invariant());
    ASSERT_TRUE(r.factor);
    EXPECT_NEAR(std::abs((*r.factor)(2)), 1.5, 1e-12);
    EXPECT_NEAR(r.factor->cwiseAbs().sum(), 1.5, 1e-12);
    ASSERT_TRUE(r.zero_free_abscissa);
}

TEST(Classify, DiagonalOnesIsNot) {
    const QuasiInvarianceReport r = quasi_invariance_classify(diag_ones(), 8, 1e-8, default_classification_grid(0.5));
    EXPECT_FALSE(r.quasi_invariant());
    EXPECT_EQ(r.reason, "rank >= 2 at order 8");
}

TEST(Classify, ZeroKernelIsQuasiInvariant) {
    const QuasiInvarianceReport r =
        quasi_invariance_classify({CoefficientMatrix::zero(), HalfPlane{0.0}}, 4, 1e-8, default_classification_grid(0.0));
    EXPECT_TRUE(r.quasi_invariant());
    EXPECT_TRUE(r.factor_zero);
}

TEST(Classify, VanishingFactorIsNot) {
    // 1 - 2^{-s} vanishes at s = 2 pi i k / log 2 on Re(s) = 0; place a grid point there.
    const DirichletKernel k = rank_one({1.0, -1.0}, -1.0);
    const QuasiInvarianceReport r = quasi_invariance_classify(k, 4, 1e-8, {complex{0.0, 2.0 * kPi / std::log(2.0)}});
    EXPECT_FALSE(r.quasi_invariant());
    EXPECT_EQ(r.reason.rfind("factor vanishes at grid point", 0), 0u);
}

// Metamorphic: a unimodular rescaling of the factor keeps the verdict.
TEST(Classify, PhaseIsIrrelevant) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> x(-1.0, 1.0), ph(0.0, 6.283185307179586);
    for (int t = 0; t < 20; ++t) {
        std::vector<complex> f{2.0, {x(rng), x(rng)}, {x(rng), x(rng)}};
        std::vector<complex> g = f;
        const complex w = std::polar(1.0, ph(rng));
        for (auto& v : g) v *= w;
        const auto grid = default_classification_grid(0.0);
        EXPECT_EQ(quasi_invariance_classify(rank_one(f), 6, 1e-8, grid).quasi_invariant(),
                  quasi_invariance_classify(rank_one(g), 6, 1e-8, grid).quasi_invariant());
    }
}

TEST(AutL, ConstantKernelInvariant) {
    const AutLReport r = autL_invariance_test({CoefficientMatrix::unit(1), HalfPlane{0.0}}, 8, 1e-9);
    EXPECT_TRUE(r.constant);
    EXPECT_TRUE(r.invariant);
}

TEST(AutL, PowerOfTwoBrokenByScaling) {
    const AutLReport r = autL_invariance_test(rank_one({0.0, 1.0}), 8, 1e-9);
    EXPECT_FALSE(r.invariant);
    ASSERT_TRUE(r.witness);
    const Automorphism psi = Automorphism::scaling(2.0, 0.0);
    const double direct = std::abs(std::pow(2.0, -(psi(1.0) + psi(1.0))) - std::pow(2.0, -2.0));
    EXPECT_GT(direct, 0.2);
}

TEST(AutL, DiagonalOnesHasWitness) {
    const AutLReport r = autL_invariance_test(diag_ones(), 200, 1e-9);
    EXPECT_FALSE(r.invariant);
    ASSERT_TRUE(r.witness);
    EXPECT_GT(r.witness->violation, r.witness->radius + 1e-9);
}

TEST(Cocycle, IdentityIsExact) {
    const std::vector<complex> pts{{1.0, 0.0}, {2.0, 1.0}};
    const CocycleReport r = cocycle_unitarity_check(Sequence{std::vector<complex>{0.0, 1.0}}, Automorphism::identity(0.0), pts, 4);
    EXPECT_LT(r.residual, 1e-15);
}

TEST(Cocycle, TranslationAndScaling) {
    const Sequence f{std::vector<complex>{0.0, 1.0}};
    const std::vector<complex> pts{{0.5, 0.0}, {1.0, 2.0}, {3.0, -1.0}};
    for (const Automorphism& g : {Automorphism::translation(1.0, 0.0), Automorphism::scaling(std::sqrt(2.0), 0.0)}) {
        const CocycleReport r = cocycle_unitarity_check(f, g, pts, 4);
        EXPECT_LT(r.residual, 1e-10);
        EXPECT_LE(r.residual, 10.0 * r.radius + 1e-15);
        EXPECT_EQ(r.pairs, 9);
    }
}

TEST(Cocycle, RandomNonvanishingFactor) {
    // 1 + 2^{-s}/4 has no zeros on Re(s) > 0.
    const Sequence f{std::vector<complex>{1.0, 0.25}};
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> re(0.2, 3.0), im(-4.0, 4.0);
    for (int t = 0; t < 20; ++t) {
        const Automorphism g = random_aut(rng, 0.0);
        std::vector<complex> pts;
        for (int i = 0; i < 3; ++i) pts.push_back({re(rng), im(rng)});
        const CocycleReport r = cocycle_unitarity_check(f, g, pts, 4);
        EXPECT_LE(r.residual, 10.0 * r.radius + 1e-12);
    }
}

TEST(Cocycle, VanishingFactorRefused) {
    const Sequence f{std::vector<complex>{1.0, -1.0}};
    const complex zero{1e-300, 2.0 * kPi / std::log(2.0)};
    EXPECT_THROW(cocycle_unitarity_check(f, Automorphism::identity(0.0), {zero}, 4), error);
}
