#include "test_util.hpp"

#include <pptforge/multipartite.hpp>

#include <gtest/gtest.h>

#include <cstdlib>

using namespace pptforge;
using pptforge::testing::random_hermitian;

namespace {

Mat diag2(double a, double b) {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

Mat pt_phi2() { return partial_transpose(projector(phi_plus(2)), {2, 2}, {0}); }

}  // namespace

TEST(HermitianEig, Identity) {
    auto e = hermitian_eig(Mat(Mat::Identity(2, 2)));
    EXPECT_DOUBLE_EQ(e.values(0), 1.0);
    EXPECT_DOUBLE_EQ(e.values(1), 1.0);
}

TEST(HermitianEig, DiagonalSortedAscending) {
    auto e = hermitian_eig(diag2(3, -1));
    EXPECT_NEAR(e.values(0), -1.0, 1e-15);
    EXPECT_NEAR(e.values(1), 3.0, 1e-15);
}

TEST(HermitianEig, PartialTransposeOfPhiPlus) {
    RVec v = eigenvalues(pt_phi2());
    const double want[] = {-0.5, 0.5, 0.5, 0.5};
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(v(i), want[i], 1e-14);
}

TEST(HermitianEig, ReconstructionResidualOnRandomMatrices) {
    for (int s = 0; s < 50; ++s) {
        CounterRng rng(11, s);
        const int n = 2 + s % 15;
        Mat m = random_hermitian(n, rng);
        auto e = hermitian_eig(m);
        Mat rec = e.vectors * e.values.cast<cplx>().asDiagonal() * e.vectors.adjoint();
        EXPECT_LE((m - rec).norm(), 1e-9 * std::max(1.0, m.norm()));
        EXPECT_LE((e.vectors.adjoint() * e.vectors - Mat::Identity(n, n)).norm(), 1e-12);
        for (int i = 1; i < n; ++i) EXPECT_LE(e.values(i - 1), e.values(i));
    }
}

TEST(IsPsd, Identity) {
    auto r = is_psd(Mat(Mat::Identity(4, 4)));
    EXPECT_TRUE(r.psd);
    EXPECT_NEAR(r.min_eigenvalue, 1.0, 1e-15);
}

TEST(IsPsd, PartialTransposeOfPhiPlusIsNot) {
    auto r = is_psd(pt_phi2());
    EXPECT_FALSE(r.psd);
    EXPECT_NEAR(r.min_eigenvalue, -0.5, 1e-14);
}

TEST(IsPsd, ZeroMatrix) {
    auto r = is_psd(Mat(Mat::Zero(3, 3)));
    EXPECT_TRUE(r.psd);
    EXPECT_EQ(r.min_eigenvalue, 0.0);
}

TEST(IsPsd, AllowanceScalesWithNorm) {
    ToleranceConfig tol;
    Mat m = diag2(1e6, -1e-4);  // allowance 1e-10 + 1e-9 * 1e6 = 1e-3
    EXPECT_TRUE(is_psd(m, tol).psd);
    EXPECT_FALSE(is_psd(diag2(1.0, -1e-4), tol).psd);
}

TEST(IsPsd, BothSignsImplyNearZero) {
    ToleranceConfig tol;
    for (int s = 0; s < 100; ++s) {
        CounterRng rng(12, s);
        Mat m = random_hermitian(4, rng) * std::pow(10.0, -(s % 14));
        if (is_psd(m, tol).psd && is_psd(Mat(-m), tol).psd) {
            const double n2 = spectral_norm(m);
            EXPECT_LE(n2, tol.psd_abs + tol.psd_rel * n2);
        }
    }
}

TEST(TraceNorm, DensityMatrixIsOne) {
    CounterRng rng(13, 0);
    EXPECT_NEAR(trace_norm(pptforge::testing::random_density(5, rng)), 1.0, 1e-12);
}

TEST(TraceNorm, PartialTransposeOfPhiPlus) { EXPECT_NEAR(trace_norm(pt_phi2()), 2.0, 1e-14); }

TEST(TraceNorm, Diagonal) { EXPECT_NEAR(trace_norm(diag2(2, -3)), 5.0, 1e-15); }

TEST(TraceNorm, BoundsAbsoluteTrace) {
    for (int s = 0; s < 100; ++s) {
        CounterRng rng(14, s);
        Mat m = random_hermitian(3 + s % 5, rng);
        EXPECT_GE(trace_norm(m) + 1e-12, std::abs(m.trace().real()));
        Mat p = m * m;
        EXPECT_NEAR(trace_norm(p), p.trace().real(), 1e-9 * std::max(1.0, p.trace().real()));
    }
}

TEST(HermitianOperatorType, RecordsDefectAndSymmetrizes) {
    Mat m = diag2(1, 2);
    m(0, 1) = cplx(1e-14, 0);
    HermitianOperator op(m);
    EXPECT_NEAR(op.hermiticity_defect(), 1e-14, 1e-20);
    EXPECT_EQ(op.matrix()(0, 1), op.matrix()(1, 0));
}

TEST(HermitianOperatorType, RejectsNonHermitian) {
    Mat m = diag2(1, 2);
    m(0, 1) = 1.0;
    EXPECT_THROW(HermitianOperator{m}, std::invalid_argument);
}

TEST(HermitianOperatorType, RejectsNonFinite) {
    Mat m = diag2(1, std::nan(""));
    EXPECT_THROW(HermitianOperator{m}, std::invalid_argument);
}

TEST(HermitianOperatorType, RejectsEmpty) { EXPECT_THROW(HermitianOperator{Mat(0, 0)}, std::invalid_argument); }

TEST(Tolerance, Defaults) {
    ToleranceConfig t;
    EXPECT_EQ(t.psd_abs, 1e-10);
    EXPECT_EQ(t.psd_rel, 1e-9);
    EXPECT_EQ(t.eq_tol, 1e-9);
    EXPECT_EQ(t.gap_tol, 1e-7);
    EXPECT_NO_THROW(t.validate());
}

TEST(Tolerance, ValidateRejectsNonPositive) {
    ToleranceConfig t;
    t.eq_tol = 0.0;
    EXPECT_THROW(t.validate(), std::invalid_argument);
}

TEST(Tolerance, EnvironmentOverridesGapTol) {
    ::setenv("PPT_FORGE_TOL", "1e-5", 1);
    EXPECT_EQ(ToleranceConfig::from_env().gap_tol, 1e-5);
    ::setenv("PPT_FORGE_TOL", "abc", 1);
    EXPECT_THROW(ToleranceConfig::from_env(), std::invalid_argument);
    ::setenv("PPT_FORGE_TOL", "-1", 1);
    EXPECT_THROW(ToleranceConfig::from_env(), std::invalid_argument);
    ::unsetenv("PPT_FORGE_TOL");
    EXPECT_EQ(ToleranceConfig::from_env().gap_tol, 1e-7);
}

TEST(Kron, OrderingAndSize) {
    Mat a = diag2(1, 2), b = diag2(3, 5);
    Mat k = kron(a, b);
    ASSERT_EQ(k.rows(), 4);
    EXPECT_EQ(k(1, 1), cplx(5, 0));
    EXPECT_EQ(k(2, 2), cplx(6, 0));
}
