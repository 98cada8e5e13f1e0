#include "dsk/structured_psd.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace dsk;

namespace {

// k = 1, b = [4], c_{1+l} = 2^{-l}, d_{1+l} = 4^l.
SkMatrix derived_example() {
    SkMatrix m;
    m.k = 1;
    m.b = Eigen::MatrixXcd::Constant(1, 1, 4.0);
    m.c_rule = SequenceRule::geometric(1.0, 0.5);
    m.d_rule = SequenceRule::geometric(1.0, 4.0);
    return m;
}

// Explicit partial sums as the oracle for a geometric series.
double partial_c2d(const SkMatrix& m, long L) {
    double s = 0.0;
    for (long l = 1; l <= L; ++l) s += std::norm(m.c(l)) / m.d(l);
    return s;
}

} // namespace

TEST(SOfA, WorkedExample) {
    const SkCertificate c = s_of_a(example_sk_matrix());
    ASSERT_EQ(c.eigenvalues_b.size(), 2u);
    EXPECT_NEAR(c.eigenvalues_b[0], 1.0 / 6.0, 1e-12);
    EXPECT_NEAR(c.eigenvalues_b[1], 1.0, 1e-12);
    EXPECT_NEAR(c.c2d_sum, 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(c.s_value, -0.5, 1e-12);
}

TEST(SOfA, DerivedGeometric) {
    const SkMatrix m = derived_example();
    const SkCertificate c = s_of_a(m);
    EXPECT_NEAR(c.c2d_sum, 1.0 / 15.0, 1e-15);
    EXPECT_NEAR(c.c2d_sum, partial_c2d(m, 60), 1e-15);
    EXPECT_NEAR(c.s_value, 59.0 / 15.0, 1e-14);
    EXPECT_GT(c.s_lower, 0.0);
}

TEST(SOfA, ZeroCouplingGivesLambdaMin) {
    SkMatrix m = example_sk_matrix();
    m.c_rule = SequenceRule::constant(0.0);
    EXPECT_NEAR(s_of_a(m).s_value, 1.0 / 6.0, 1e-12);
}

TEST(SOfA, PowerRulesUseEnvelopeTail) {
    SkMatrix m = derived_example();
    m.c_rule = SequenceRule::power(1.0, -1.0);
    m.d_rule = SequenceRule::power(1.0, 1.0);
    const SkCertificate c = s_of_a(m);
    // sum_l l^{-3} = zeta(3).
    EXPECT_NEAR(c.c2d_sum, 1.2020569031595942, 1e-9);
    EXPECT_LE(c.c2d_sum, 1.2020569031595942);
    EXPECT_GE(c.c2d_sum + c.c2d.remainder, 1.2020569031595942);
}

TEST(SOfA, DivergentSumRefused) {
    SkMatrix m = derived_example();
    m.c_rule = SequenceRule::constant(1.0);
    m.d_rule = SequenceRule::constant(1.0);
    try {
        s_of_a(m);
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::uncertifiable);
    }
}

TEST(CertifyPsd, DerivedPositiveMargin) {
    const SkPsdReport r = certify_psd_sk(derived_example(), 16);
    EXPECT_TRUE(r.schur_certified);
    EXPECT_TRUE(r.ladder.psd());
    for (const SchurStep& st : r.schur) EXPECT_GE(st.lambda_min, st.weyl_lower - 1e-12);
}

TEST(CertifyPsd, WorkedExampleNegativeMarginStillPsd) {
    const SkPsdReport r = certify_psd_sk(example_sk_matrix(), 16);
    EXPECT_FALSE(r.schur_certified);
    EXPECT_TRUE(r.ladder.psd());
    for (double e : r.ladder.min_eigenvalues) EXPECT_GE(e, -1e-9);
}

TEST(CertifyPsd, ZeroHeadBoundary) {
    SkMatrix m;
    m.k = 1;
    m.b = Eigen::MatrixXcd::Zero(1, 1);
    m.c_rule = SequenceRule::constant(0.0);
    m.d_rule = SequenceRule::power(3.0, 0.5);
    const SkPsdReport r = certify_psd_sk(m, 8);
    EXPECT_EQ(r.sk.s_value, 0.0);
    EXPECT_TRUE(r.ladder.psd());
}

TEST(Perturbation, EpsZeroReduces) {
    EXPECT_TRUE(perturbation_psd(derived_example(), 1, 0.0, 16));
    EXPECT_TRUE(perturbation_psd(derived_example(), 3, 0.0, 16));
}

TEST(Perturbation, HeadIndexUpToMargin) {
    const SkMatrix m = derived_example();
    const double s = s_of_a(m).s_value;
    EXPECT_TRUE(perturbation_psd(m, 1, s / 2.0, 16));
    EXPECT_TRUE(perturbation_psd(m, 1, s, 16));
    EXPECT_THROW(perturbation_psd(m, 1, 1.5 * s, 16), error);
    EXPECT_THROW(perturbation_psd(m, 1, -0.1, 16), error);
}

TEST(Perturbation, NegativeMarginRefused) {
    EXPECT_THROW(perturbation_psd(example_sk_matrix(), 1, 0.0, 8), error);
}

TEST(EpsilonSearch, HeadIndex) {
    const SkMatrix m = derived_example();
    const EpsilonSearch e = epsilon_m_search(m, 1);
    EXPECT_NEAR(e.eps, 59.0 / 30.0, 1e-13);
    EXPECT_GT(e.s_after, 0.0);
}

TEST(EpsilonSearch, TailIndexWithoutCoupling) {
    SkMatrix m = derived_example();
    m.c_rule = SequenceRule::constant(0.0);
    const EpsilonSearch e = epsilon_m_search(m, 3);
    EXPECT_DOUBLE_EQ(e.eps, m.d(2) / 2.0);
    ASSERT_TRUE(e.eps_max);
    EXPECT_DOUBLE_EQ(*e.eps_max, m.d(2));
}

TEST(EpsilonSearch, TailIndexWithCoupling) {
    const SkMatrix m = derived_example();
    const EpsilonSearch e = epsilon_m_search(m, 2);
    ASSERT_TRUE(e.eps_max);
    EXPECT_GT(e.eps, 0.0);
    EXPECT_LT(e.eps, *e.eps_max);
    EXPECT_GT(e.s_after, 0.0);
    EXPECT_TRUE(psd_check(CoefficientMatrix{perturbed(m, 2, e.eps)}, 16).psd());
    EXPECT_THROW(epsilon_m_search(example_sk_matrix(), 1), error);
}

TEST(Growth, Examples) {
    SkMatrix m = derived_example();
    m.d_rule = SequenceRule::power(1.0, 1.0);
    // d at matrix index l is l - 1 <= l^{1.5}.
    EXPECT_TRUE(growth_check(m, 2.5, 100).ok);
    m.d_rule = SequenceRule::geometric(1.0, 4.0);
    EXPECT_FALSE(growth_check(m, 3.0, 100).ok);
    m.d_rule = SequenceRule::power(1.0, 2.0);
    const GrowthReport r = growth_check(m, 3.0, 100);
    EXPECT_TRUE(r.ok);
    EXPECT_LE(r.C, 1.0);
}

TEST(WorkedExample, SchurSequence) {
    const WorkedExampleReport r = paper_example(20, 16);
    ASSERT_EQ(r.steps.size(), 20u);
    const double r6 = 1.0 / std::sqrt(6.0);
    EXPECT_NEAR(r.steps[0].S_j, 0.25, 1e-16);
    EXPECT_NEAR(r.steps[0].det, 0.25 * (5.0 / 12.0) - (r6 - 0.25) * (r6 - 0.25), 1e-15);
    for (const ExampleStep& st : r.steps) {
        EXPECT_NEAR(st.S_j, st.S_closed, 1e-15);
        EXPECT_GT(st.det, 0.0);
    }
    const double det_inf = (1.0 / 6.0) * (1.0 / 3.0) - (r6 - 1.0 / 3.0) * (r6 - 1.0 / 3.0);
    EXPECT_GT(det_inf, 0.0);
    EXPECT_NEAR(r.steps.back().det, det_inf, 1e-11);
    EXPECT_TRUE(r.all_positive);
    EXPECT_TRUE(r.ladder.psd());
}
