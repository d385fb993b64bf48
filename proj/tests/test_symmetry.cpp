#include "test_util.hpp"

#include <pptforge/conversion.hpp>

#include <gtest/gtest.h>

using namespace pptforge;
using pptforge::testing::random_density;
using pptforge::testing::random_hermitian;

namespace {

Mat pauli_z() {
    Mat z = Mat::Zero(2, 2);
    z(0, 0) = 1;
    z(1, 1) = -1;
    return z;
}

SymmetryGroup iso_iso(int d, int dp) {
    return SymmetryGroup::twirls({d, d, dp, dp}, {{Twirl::Kind::Isotropic, 0, 1}, {Twirl::Kind::Isotropic, 2, 3}});
}

}  // namespace

TEST(GenerateGroup, Involution) {
    auto g = generate_group({kron(pauli_z(), pauli_z())});
    EXPECT_EQ(g.order(), 2u);
}

TEST(GenerateGroup, JointS3) {
    auto g = generate_group({qubit_permutation(6, {1, 0, 2, 4, 3, 5}), qubit_permutation(6, {1, 2, 0, 4, 5, 3})});
    EXPECT_EQ(g.order(), 6u);
}

TEST(GenerateGroup, GhzWRegressionOrder) {
    // recorded closure of the GHZ/W generator set on V (x) V'
    EXPECT_EQ(ghz_w_group(true).order(), 576u);
    EXPECT_EQ(ghz_w_group(false).order(), 576u);
    EXPECT_NEAR(averaging_trace(ghz_w_group(true)), 24.0, 1e-9);
    EXPECT_EQ(invariant_basis(ghz_w_group(true)).size(), 24);
}

TEST(GenerateGroup, ContainsIdentityAndIsClosed) {
    const auto& g = ghz_w_group(true);
    const int n = g.dim();
    bool has_id = false;
    for (const auto& e : g.elements()) has_id = has_id || max_abs(e - Mat::Identity(n, n)) < 1e-12;
    EXPECT_TRUE(has_id);
    // spot-check closure: products of a few elements stay in the group
    auto in_group = [&](const Mat& u) {
        for (const auto& e : g.elements()) {
            cplx ph = (e.adjoint() * u).trace() / double(n);
            if (std::abs(std::abs(ph) - 1.0) < 1e-9 && max_abs(u - ph * e) < 1e-9) return true;
        }
        return false;
    };
    for (size_t i = 0; i < g.order(); i += 97)
        for (size_t j = 0; j < g.order(); j += 131) EXPECT_TRUE(in_group(g.elements()[i] * g.elements()[j]));
}

TEST(GenerateGroup, CapExceeded) {
    // irrational rotation angle: closure never terminates
    Mat r(2, 2);
    const double a = 1.0;
    r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    EXPECT_THROW(generate_group({r}, 50), std::runtime_error);
}

TEST(GenerateGroup, RejectsNonUnitary) {
    Mat m = Mat::Identity(2, 2) * 2.0;
    EXPECT_THROW(generate_group({m}), std::invalid_argument);
}

TEST(AverageProject, IsotropicTwirlIdempotentAndPsdPreserving) {
    auto g = iso_iso(2, 2);
    for (int s = 0; s < 100; ++s) {
        CounterRng rng(31, s);
        Mat x = random_hermitian(16, rng);
        Mat p = average_project(x, g);
        EXPECT_LE(max_abs(average_project(p, g) - p), 1e-12);
        EXPECT_NEAR(std::abs(p.trace() - x.trace()), 0.0, 1e-10);
        Mat r = random_density(16, rng);
        EXPECT_TRUE(is_psd(average_project(r, g)).psd);
    }
}

TEST(AverageProject, FiniteGroupIdempotentAndPsdPreserving) {
    const auto& g = unlock_group();
    for (int s = 0; s < 100; ++s) {
        CounterRng rng(32, s);
        Mat x = random_hermitian(32, rng);
        Mat p = average_project(x, g);
        EXPECT_LE(max_abs(average_project(p, g) - p), 1e-12);
        Mat r = random_density(32, rng);
        EXPECT_TRUE(is_psd(average_project(r, g)).psd);
    }
}

TEST(AverageProject, IsotropicLandsInSpan) {
    CounterRng rng(33, 0);
    Mat x = random_hermitian(9, rng);
    auto g = SymmetryGroup::twirls({3, 3}, {{Twirl::Kind::Isotropic, 0, 1}});
    Mat p = average_project(x, g);
    Mat pp = projector(phi_plus(3)), q = Mat::Identity(9, 9) - pp;
    double a = (p * pp).trace().real(), b = (p * q).trace().real() / 8.0;
    EXPECT_LE(max_abs(p - a * pp - b * q), 1e-12);
}

TEST(AverageProject, WernerLandsInSpan) {
    CounterRng rng(34, 0);
    Mat x = random_hermitian(9, rng);
    auto g = SymmetryGroup::twirls({3, 3}, {{Twirl::Kind::Werner, 0, 1}});
    Mat p = average_project(x, g);
    Mat ps = proj_sym(3), pa = proj_antisym(3);
    double a = (p * ps).trace().real() / 6.0, b = (p * pa).trace().real() / 3.0;
    EXPECT_LE(max_abs(p - a * ps - b * pa), 1e-12);
}

TEST(InvariantBasis, OperatorsAreFixedAndIndependent) {
    for (const SymmetryGroup* g : {&unlock_group(), &ghz_w_group(false)}) {
        auto ib = invariant_basis(*g);
        for (const auto& b : ib.ops) {
            EXPECT_LE(max_abs(b - b.adjoint()), 1e-12);
            EXPECT_LE(max_abs(average_project(b, *g) - b), 1e-10);
        }
        Eigen::SelfAdjointEigenSolver<RMat> es(ib.gram);
        EXPECT_GT(es.eigenvalues().minCoeff(), 1e-9);
    }
}

TEST(InvariantBasis, IsotropicPairHasFourOperators) {
    auto ib = invariant_basis(iso_iso(2, 3));
    EXPECT_EQ(ib.size(), 4);
    EXPECT_NEAR(averaging_trace(iso_iso(2, 3)), 4.0, 1e-12);
}

TEST(InvariantBasis, DimensionMatchesAveragingTrace) {
    auto g = generate_group({kron(pauli_z(), pauli_z()), qubit_permutation(2, {1, 0})});
    EXPECT_EQ(invariant_basis(g).size(), static_cast<int>(std::lround(averaging_trace(g))));
}

TEST(SymmetryUse, MismatchedDimensionRejected) {
    ConversionSpec spec{bipartite_space(2, 3), projector(phi_plus(2)), projector(phi_plus(3)), Mode::TP, {"A"}};
    EXPECT_THROW(build_conversion_problem(spec, iso_iso(2, 2)), std::invalid_argument);
}

TEST(SymmetryUse, NonInvariantPairRejected) {
    ConversionSpec spec{qubit_space(3, 3), projector(ket_bits("001")), projector(w3()), Mode::TP, {}};
    EXPECT_THROW(build_conversion_problem(spec, ghz_w_group(true)), std::invalid_argument);
}
