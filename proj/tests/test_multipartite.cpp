#include "test_util.hpp"

#include <pptforge/certificates.hpp>

#include <gtest/gtest.h>

using namespace pptforge;
using pptforge::testing::random_density;
using pptforge::testing::random_hermitian;

TEST(TensorProduct, Identities) {
    auto r = tensor_product(HermitianOperator::identity(2), HermitianOperator::identity(2));
    EXPECT_EQ(max_abs(r.matrix() - Mat::Identity(4, 4)), 0.0);
}

TEST(TensorProduct, ProductKet) {
    auto r = tensor_product(HermitianOperator(projector(ket_bits("0"))), HermitianOperator(projector(ket_bits("1"))));
    EXPECT_EQ(max_abs(r.matrix() - projector(ket_bits("01"))), 0.0);
}

TEST(TensorProduct, PhiPlusSquared) {
    Mat p = projector(phi_plus(2));
    Mat k = tensor_product(HermitianOperator(p), HermitianOperator(p)).matrix();
    const int support[] = {0, 3, 12, 15};
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) {
            bool in = std::count(support, support + 4, i) && std::count(support, support + 4, j);
            EXPECT_NEAR(std::abs(k(i, j)), in ? 0.25 : 0.0, 1e-15);
        }
}

TEST(PartialTrace, PhiPlusMarginal) {
    Mat r = partial_trace(projector(phi_plus(2)), TensorSpace::bipartite(2), {"A"});
    EXPECT_LE(max_abs(r - Mat::Identity(2, 2) / 2.0), 1e-15);
}

TEST(PartialTrace, ProductFactorizes) {
    CounterRng rng(21, 0);
    Mat a = random_density(2, rng), b = random_density(3, rng);
    TensorSpace s({{"A", 2}, {"B", 3}});
    EXPECT_LE(max_abs(partial_trace(kron(a, b), s, {"B"}) - b), 1e-14);
    EXPECT_LE(max_abs(partial_trace(kron(a, b), s, {"A"}) - a), 1e-14);
}

TEST(PartialTrace, KeepFirstFactorScalesByTrace) {
    for (int s = 0; s < 20; ++s) {
        CounterRng rng(22, s);
        Mat x = random_hermitian(3, rng), y = random_hermitian(2, rng);
        Mat r = partial_trace(kron(x, y), {3, 2}, {0});
        EXPECT_LE(max_abs(r - y.trace() * x), 1e-12);
    }
}

TEST(PartialTrace, PreservesTrace) {
    CounterRng rng(23, 0);
    Mat m = random_hermitian(12, rng);
    Mat r = partial_trace(m, {2, 3, 2}, {0, 2});
    EXPECT_NEAR(std::abs(r.trace() - m.trace()), 0.0, 1e-12);
}

TEST(PartialTrace, BipartiteTnpCertificateMarginal) {
    // Omega = (1/2) P+_2 (x) P+_3 + (1 - P+_2) (x) (1 - P+_3) / 8
    Certificate c = bipartite_certificate(2, 3, Mode::TNP);
    Mat r = c.spec.space.trace_output(*c.omega);
    Mat p = projector(phi_plus(2));
    Mat want = 0.5 * p + (Mat::Identity(4, 4) - p);
    EXPECT_LE(max_abs(r - want), 1e-14);
    EXPECT_TRUE(is_psd(Mat(Mat::Identity(4, 4) - r)).psd);
}

TEST(PartialTrace, UnknownLabel) {
    EXPECT_THROW(partial_trace(projector(phi_plus(2)), TensorSpace::bipartite(2), {"Z"}), std::invalid_argument);
}

TEST(PartialTranspose, Involution) {
    for (int s = 0; s < 20; ++s) {
        CounterRng rng(24, s);
        Mat m = random_hermitian(8, rng);
        Mat twice = partial_transpose(partial_transpose(m, {2, 2, 2}, {1}), {2, 2, 2}, {1});
        EXPECT_EQ(max_abs(twice - m), 0.0);
    }
}

TEST(PartialTranspose, ProductCase) {
    CounterRng rng(25, 0);
    Mat a = random_density(2, rng), b = random_density(2, rng);
    Mat r = partial_transpose(kron(a, b), TensorSpace::bipartite(2), {"A"});
    EXPECT_LE(max_abs(r - kron(Mat(a.transpose()), b)), 1e-15);
    EXPECT_TRUE(is_psd(r).psd);
}

TEST(PartialTranspose, PhiPlusSpectrum) {
    RVec v = eigenvalues(partial_transpose(projector(phi_plus(2)), TensorSpace::bipartite(2), {"A"}));
    EXPECT_NEAR(v(0), -0.5, 1e-15);
    for (int i = 1; i < 4; ++i) EXPECT_NEAR(v(i), 0.5, 1e-15);
}

TEST(PartialTranspose, DisjointSubsetsCommute) {
    CounterRng rng(26, 0);
    Mat m = random_hermitian(12, rng);
    std::vector<int> d{2, 3, 2};
    Mat ab = partial_transpose(partial_transpose(m, d, {0}), d, {1});
    Mat ba = partial_transpose(partial_transpose(m, d, {1}), d, {0});
    EXPECT_EQ(max_abs(ab - ba), 0.0);
    EXPECT_EQ(max_abs(ab - partial_transpose(m, d, {0, 1})), 0.0);
}

TEST(PartialTranspose, UnknownLabel) {
    EXPECT_THROW(partial_transpose(projector(phi_plus(2)), TensorSpace::bipartite(2), {"C"}), std::invalid_argument);
}

TEST(CanonicalStates, Ghz3Amplitudes) {
    Vec g = ghz(3);
    for (int i = 0; i < 8; ++i) EXPECT_NEAR(std::abs(g(i)), (i == 0 || i == 7) ? 1 / std::sqrt(2.0) : 0.0, 1e-15);
}

TEST(CanonicalStates, W3Amplitudes) {
    Vec w = w3();
    for (int i = 0; i < 8; ++i)
        EXPECT_NEAR(std::abs(w(i)), (i == 1 || i == 2 || i == 4) ? 1 / std::sqrt(3.0) : 0.0, 1e-15);
}

TEST(CanonicalStates, WernerTwoIsSinglet) {
    Vec s = (ket_bits("01") - ket_bits("10")) / std::sqrt(2.0);
    EXPECT_LE(max_abs(werner_antisym(2) - projector(s)), 1e-15);
}

TEST(CanonicalStates, ProjectorsAndTraces) {
    for (int d = 2; d <= 5; ++d) {
        Mat ps = proj_sym(d), pa = proj_antisym(d);
        const int n = d * d;
        EXPECT_LE(max_abs(ps + pa - Mat::Identity(n, n)), 1e-12);
        EXPECT_LE(max_abs(ps * ps - ps), 1e-12);
        EXPECT_LE(max_abs(pa * pa - pa), 1e-12);
        EXPECT_NEAR(werner_antisym(d).trace().real(), 1.0, 1e-12);
        EXPECT_LE(max_abs(werner_antisym(d) - 2.0 / (d * d - d) * pa), 1e-15);
        Mat p = projector(phi_plus(d));
        EXPECT_NEAR(p.trace().real(), 1.0, 1e-12);
        EXPECT_TRUE(is_psd(p).psd);
    }
    for (int n = 2; n <= 5; ++n) EXPECT_NEAR(ghz(n).norm(), 1.0, 1e-12);
}

TEST(ChoiApply, ReplacementChannel) {
    CounterRng rng(27, 0);
    ChoiSpace cs = bipartite_space(2, 2);
    Mat sigma = random_density(4, rng), rho = random_hermitian(4, rng);
    Mat omega = kron(Mat(Mat::Identity(4, 4)), sigma);
    EXPECT_LE(max_abs(choi_apply(omega, cs, rho) - rho.trace() * sigma), 1e-13);
}

TEST(ChoiApply, SwapIsIdentityChannel) {
    ChoiSpace cs(TensorSpace({{"A", 3}}), TensorSpace({{"A", 3}}));
    CounterRng rng(28, 0);
    Mat rho = random_hermitian(3, rng);
    EXPECT_LE(max_abs(choi_apply(swap_operator(3), cs, rho) - rho), 1e-14);
}

TEST(ChoiApply, BipartiteTnpCertificateOnPhiPlus) {
    Certificate c = bipartite_certificate(2, 3, Mode::TNP);
    Mat out = choi_apply(*c.omega, c.spec.space, projector(phi_plus(2)));
    EXPECT_LE(max_abs(out - 0.5 * projector(phi_plus(3))), 1e-14);
}

TEST(ChoiApply, DimensionMismatch) {
    EXPECT_THROW(choi_apply(Mat(Mat::Identity(16, 16)), bipartite_space(2, 2), Mat(Mat::Identity(3, 3))),
                 std::invalid_argument);
}

TEST(ChoiApply, IsomorphismRoundTrip) {
    ChoiSpace cs(TensorSpace({{"A", 2}, {"B", 2}}), TensorSpace({{"A", 3}}));
    for (int s = 0; s < 100; ++s) {
        CounterRng rng(29, s);
        Mat omega = random_hermitian(12, rng), a = random_hermitian(4, rng), b = random_hermitian(3, rng);
        cplx lhs = (choi_apply(omega, cs, a) * b).trace();
        cplx rhs = (omega * kron(a, b)).trace();
        const double scale = std::max(1.0, omega.norm() * a.norm() * b.norm());
        EXPECT_LE(std::abs(lhs - rhs) / scale, 1e-9);
    }
}

TEST(SuccessProbability, IdentityOmega) {
    CounterRng rng(30, 0);
    Mat rho = random_density(4, rng);
    Mat sigma = projector(phi_plus(2));
    auto sp = success_probability(Mat(Mat::Identity(16, 16)), rho, sigma);
    EXPECT_NEAR(sp.probability, 1.0, 1e-14);
    EXPECT_NEAR(sp.leakage, 3.0, 1e-14);
}

TEST(SuccessProbability, GhzToWPrimal) {
    Certificate c = ghz_w_tp_primal();
    auto sp = success_probability(*c.omega, c.spec.rho, c.spec.sigma);
    EXPECT_NEAR(sp.probability, 6 * constant("b2"), 1e-12);
    EXPECT_NEAR(sp.leakage, 0.0, 1e-12);
}

TEST(SuccessProbability, BipartiteTp23) {
    Certificate c = bipartite_certificate(2, 3, Mode::TP);
    EXPECT_NEAR(success_probability(*c.omega, c.spec.rho, c.spec.sigma).probability, 0.4, 1e-14);
}

TEST(Negativity, ProductStateIsZero) {
    Mat r = projector(ket_bits("01"));
    EXPECT_NEAR(negativity(r, {2, 2}, {0}), 0.0, 1e-15);
}

TEST(Negativity, MaximallyEntangled) {
    for (int d = 2; d <= 6; ++d)
        EXPECT_NEAR(negativity(projector(phi_plus(d)), {d, d}, {0}), (d - 1) / 2.0, 1e-12);
}

TEST(Negativity, RatioMatchesTnpFormula) {
    for (int d = 2; d <= 6; ++d)
        for (int dp = 2; dp <= 6; ++dp) {
            double r = negativity(projector(phi_plus(d)), {d, d}, {0}) /
                       negativity(projector(phi_plus(dp)), {dp, dp}, {0});
            EXPECT_NEAR(r, double(d - 1) / (dp - 1), 1e-12);
        }
}

TEST(TensorSpaceType, LabelsAndErrors) {
    TensorSpace s = TensorSpace::qubits(3);
    EXPECT_EQ(s.total_dim(), 8);
    EXPECT_EQ(s.index_of("C"), 2);
    EXPECT_THROW(s.index_of("D"), std::invalid_argument);
    EXPECT_THROW(TensorSpace({{"A", 2}, {"A", 2}}), std::invalid_argument);
}

TEST(ChoiSpaceType, TrivialInputFactorParty) {
    // P+_AB -> GHZ_ABC: party C has no input factor
    ChoiSpace cs(TensorSpace::qubits(2), TensorSpace::qubits(3));
    EXPECT_EQ(cs.parties(), (std::vector<std::string>{"A", "B", "C"}));
    EXPECT_EQ(cs.party_factors("C"), std::vector<int>{4});
    EXPECT_TRUE(cs.input_party_factors("C").empty());
    EXPECT_EQ(cs.dim(), 32);
}

TEST(QubitPermutation, CyclesParties) {
    Mat c = qubit_permutation(3, {1, 2, 0});
    EXPECT_LE(max_abs(c * ket_bits("100") - ket_bits("010")), 0.0);
    EXPECT_LE(max_abs(c * c * c - Mat::Identity(8, 8)), 0.0);
}
