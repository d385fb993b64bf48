#include "test_util.hpp"

#include <pptforge/analysis.hpp>
#include <pptforge/json_io.hpp>

#include <boost/multiprecision/cpp_int.hpp>
#include <gtest/gtest.h>

using namespace pptforge;
using boost::multiprecision::cpp_rational;

namespace {

RVec vec(std::initializer_list<double> v) {
    RVec r(v.size());
    int i = 0;
    for (double x : v) r(i++) = x;
    return r;
}

// continued-fraction recovery of a small-denominator rational
cpp_rational rationalize(double v, long long max_den = 10000) {
    long long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    double x = v;
    for (int it = 0; it < 40; ++it) {
        long long a = static_cast<long long>(std::floor(x));
        long long h2 = a * h1 + h0, k2 = a * k1 + k0;
        if (k2 > max_den) break;
        h0 = h1; h1 = h2; k0 = k1; k1 = k2;
        double frac = x - double(a);
        if (std::abs(double(h1) / double(k1) - v) < 1e-13 || frac < 1e-13) break;
        x = 1.0 / frac;
    }
    return cpp_rational(h1, k1);
}

// exact solve of B s = b by Gaussian elimination over the rationals
std::vector<cpp_rational> solve_exact(std::vector<std::vector<cpp_rational>> a, std::vector<cpp_rational> b) {
    const size_t n = b.size();
    for (size_t c = 0; c < n; ++c) {
        size_t p = c;
        while (p < n && a[p][c] == 0) ++p;
        if (p == n) throw std::runtime_error("singular basis");
        std::swap(a[p], a[c]);
        std::swap(b[p], b[c]);
        for (size_t r = 0; r < n; ++r) {
            if (r == c || a[r][c] == 0) continue;
            cpp_rational f = a[r][c] / a[c][c];
            for (size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    for (size_t c = 0; c < n; ++c) b[c] /= a[c][c];
    return b;
}

ConversionSpec iso_spec(int d, int dp, double fidelity, Mode mode) {
    Mat p = projector(phi_plus(d));
    Mat rho = fidelity * p + (1.0 - fidelity) * (Mat::Identity(d * d, d * d) - p) / double(d * d - 1);
    return {bipartite_space(d, dp), rho, projector(phi_plus(dp)), mode, {"A"}};
}

SymmetryGroup iso_iso(int d, int dp) {
    return SymmetryGroup::twirls({d, d, dp, dp}, {{Twirl::Kind::Isotropic, 0, 1}, {Twirl::Kind::Isotropic, 2, 3}});
}

}  // namespace

// ---- LP ----

TEST(SolveLp, SmallOracle) {
    // max x + y  s.t. x + 2y <= 4, 3x + y <= 6, x, y >= 0  ->  (8/5, 6/5), 14/5
    LpProblem lp(2);
    lp.c = vec({1, 1});
    lp.add_le(vec({1, 2}), 4);
    lp.add_le(vec({3, 1}), 6);
    auto r = solve_lp(lp);
    ASSERT_EQ(r.status, SolveStatus::Optimal);
    EXPECT_NEAR(r.objective, 2.8, 1e-12);
    EXPECT_NEAR(r.x(0), 1.6, 1e-12);
    EXPECT_NEAR(r.x(1), 1.2, 1e-12);
    EXPECT_NEAR(r.gap, 0.0, 1e-12);
}

TEST(SolveLp, EqualityAndFreeVariable) {
    // max -x  s.t. x - y = -3, y in [0, 1], x free  ->  x = -3
    LpProblem lp(2);
    lp.c = vec({-1, 0});
    lp.lb(0) = -std::numeric_limits<double>::infinity();
    lp.ub(1) = 1.0;
    lp.add_eq(vec({1, -1}), -3);
    auto r = solve_lp(lp);
    ASSERT_EQ(r.status, SolveStatus::Optimal);
    EXPECT_NEAR(r.objective, 3.0, 1e-12);
}

TEST(SolveLp, Infeasible) {
    LpProblem lp(1);
    lp.c = vec({1});
    lp.add_le(vec({1}), -1);  // x <= -1 with x >= 0
    EXPECT_EQ(solve_lp(lp).status, SolveStatus::Infeasible);
}

TEST(SolveLp, Unbounded) {
    LpProblem lp(2);
    lp.c = vec({1, 0});
    lp.add_le(vec({-1, 1}), 1);
    EXPECT_EQ(solve_lp(lp).status, SolveStatus::Unbounded);
}

TEST(SolveLp, ReducedCostsNonnegativeAtOptimum) {
    auto r = solve_lp(bipartite_lp(3, 5, Mode::TP));
    ASSERT_EQ(r.status, SolveStatus::Optimal);
    EXPECT_GE(r.reduced_costs.minCoeff(), -1e-10);
    EXPECT_GE(r.slacks.minCoeff(), -1e-10);
}

TEST(BipartiteLp, MatchesClosedForms) {
    for (auto [d, dp] : std::vector<std::pair<int, int>>{{2, 3}, {2, 4}, {3, 4}, {3, 5}}) {
        auto tp = solve_lp(bipartite_lp(d, dp, Mode::TP));
        auto tnp = solve_lp(bipartite_lp(d, dp, Mode::TNP));
        ASSERT_EQ(tp.status, SolveStatus::Optimal);
        ASSERT_EQ(tnp.status, SolveStatus::Optimal);
        EXPECT_NEAR(tp.objective, mes_tp(d, dp), 1e-10) << d << "," << dp;
        EXPECT_NEAR(tnp.objective, mes_tnp(d, dp), 1e-10) << d << "," << dp;
    }
}

TEST(BipartiteLp, ExactBasisRecomputationGivesTwoFifths) {
    LpProblem lp = bipartite_lp(2, 3, Mode::TP);
    auto r = solve_lp(lp);
    ASSERT_EQ(r.status, SolveStatus::Optimal);
    const auto& sf = r.form;
    const int m = static_cast<int>(sf.As.rows()), ns = static_cast<int>(sf.As.cols());
    std::vector<std::vector<cpp_rational>> B(m, std::vector<cpp_rational>(m));
    std::vector<cpp_rational> b(m);
    for (int i = 0; i < m; ++i) {
        b[i] = rationalize(sf.bs(i));
        for (int j = 0; j < m; ++j) {
            const int col = r.basis[j];
            B[i][j] = col < ns ? rationalize(sf.As(i, col)) : cpp_rational(i == col - ns ? 1 : 0);
        }
    }
    auto sb = solve_exact(B, b);
    std::vector<cpp_rational> s(ns, 0);
    for (int j = 0; j < m; ++j)
        if (r.basis[j] < ns) s[r.basis[j]] = sb[j];
    for (int k = 0; k < ns; ++k) EXPECT_GE(s[k], 0);
    cpp_rational obj = 0;
    for (int k = 0; k < lp.num_vars(); ++k) {
        cpp_rational xk = rationalize(sf.offset(k));
        if (sf.pos_col[k] >= 0) xk += s[sf.pos_col[k]];
        if (sf.neg_col[k] >= 0) xk -= s[sf.neg_col[k]];
        obj += rationalize(lp.c(k)) * xk;
    }
    EXPECT_EQ(obj, cpp_rational(2, 5));
}

TEST(BipartiteLp, RejectsBadInput) {
    EXPECT_THROW(bipartite_lp(1, 3, Mode::TP), std::invalid_argument);
    EXPECT_THROW(bipartite_lp(2, 3, Mode::None), std::invalid_argument);
}

// ---- SDP ----

TEST(SolveSdp, OffDiagonalOracle) {
    // max x  s.t. [[1, x], [x, 1]] >= 0  ->  1
    SdpProblem p(1);
    p.c(0) = 1.0;
    Mat f1 = Mat::Zero(2, 2);
    f1(0, 1) = f1(1, 0) = 1.0;
    p.add_block("M", Mat::Identity(2, 2)).F[0] = f1;
    auto r = solve_sdp(p);
    ASSERT_EQ(r.status, SolveStatus::Optimal);
    EXPECT_NEAR(r.objective, 1.0, 1e-7);
    EXPECT_NEAR(r.gap, 0.0, 1e-7);
    EXPECT_GE(r.worst_margin(), -1e-9);
}

TEST(SolveSdp, EqualityConstrainedOracle) {
    // max x0  s.t. x0 + x1 = 1, diag(x0, x1) >= 0, x0 <= 3/4  ->  3/4
    SdpProblem p(2);
    p.c = vec({1, 0});
    p.E = RMat::Ones(1, 2);
    p.f = vec({1});
    auto& b = p.add_block("diag", Mat::Zero(3, 3));
    b.F0(2, 2) = 0.75;
    b.F[0](0, 0) = 1;
    b.F[1](1, 1) = 1;
    b.F[0](2, 2) = -1;
    auto r = solve_sdp(p);
    ASSERT_EQ(r.status, SolveStatus::Optimal);
    EXPECT_NEAR(r.objective, 0.75, 1e-7);
    EXPECT_NEAR(r.x(1), 0.25, 1e-6);
}

TEST(SolveSdp, DivergenceFlagged) {
    // max x  s.t. x >= 0: unbounded
    SdpProblem p(1);
    p.c(0) = 1.0;
    p.add_block("x", Mat::Zero(1, 1)).F[0] = Mat::Identity(1, 1);
    auto r = solve_sdp(p);
    EXPECT_NE(r.status, SolveStatus::Optimal);
    EXPECT_NE(r.message.find("diverged"), std::string::npos);
}

TEST(SolveSdp, InconsistentEqualities) {
    SdpProblem p(1);
    p.c(0) = 1.0;
    p.E = RMat::Ones(2, 1);
    p.f = vec({1, 2});
    p.add_block("x", Mat::Zero(1, 1)).F[0] = Mat::Identity(1, 1);
    EXPECT_EQ(solve_sdp(p).status, SolveStatus::Infeasible);
}

TEST(SolveSdp, NoTraceConstraintIsUnbounded) {
    ConversionSpec spec{bipartite_space(2, 2), projector(phi_plus(2)), projector(phi_plus(2)), Mode::None, {"A"}};
    auto r = solve_sdp(build_conversion_problem(spec, iso_iso(2, 2)).sdp);
    EXPECT_NE(r.status, SolveStatus::Optimal);
}

// ---- conversion problems ----

TEST(ReduceToLp, AgreesWithUnreducedSdp) {
    for (auto [fidelity, mode] : {std::pair{1.0, Mode::TP}, {1.0, Mode::TNP}, {0.8, Mode::TP}, {0.8, Mode::TNP}}) {
        auto spec = iso_spec(2, 2, fidelity, mode);
        auto reduced = build_conversion_problem(spec, iso_iso(2, 2));
        auto lp = reduce_to_lp(reduced.sdp);
        ASSERT_TRUE(lp.has_value());
        auto lr = solve_lp(*lp);
        ASSERT_EQ(lr.status, SolveStatus::Optimal);
        auto full = solve_conversion(build_conversion_problem(spec), {});
        EXPECT_NEAR(lr.objective, full.value, 1e-6) << fidelity << " " << to_string(mode);
        // full-rank isotropic inputs cannot reach P+ exactly
        EXPECT_NEAR(lr.objective, fidelity == 1.0 ? 1.0 : 0.0, 1e-6);
    }
}

TEST(ReduceToLp, RejectsNonCommutingBlocks) {
    SdpProblem p(2);
    auto& b = p.add_block("M", Mat::Identity(2, 2));
    b.F[0] = Mat::Zero(2, 2);
    b.F[0](0, 1) = b.F[0](1, 0) = 1;
    b.F[1] = Mat::Zero(2, 2);
    b.F[1](0, 0) = 1;
    b.F[1](1, 1) = -1;
    EXPECT_FALSE(reduce_to_lp(p).has_value());
}

TEST(OptimalProbability, CertifiedInstances) {
    struct Case {
        const char* src;
        const char* tgt;
        Mode mode;
        std::vector<std::string> ppt;
        double expect;
    };
    const std::vector<Case> cases{
        {"phi2", "phi3", Mode::TP, {}, 0.4},
        {"phi3", "phi4", Mode::TNP, {}, 2.0 / 3.0},
        {"werner3", "phi2", Mode::TP, {}, aws(3, 2)},
        {"werner2", "phi3", Mode::TP, {}, aws(2, 3)},
        {"ghz3", "w3", Mode::TP, {}, constant("p_ghz_w_tp")},
        {"ghz3", "w3", Mode::TNP, {}, 0.8},
        {"w3", "ghz3", Mode::TNP, {}, 1.0 / 3.0},
        {"phi2", "ghz3", Mode::TNP, {"A", "B"}, 0.6},
    };
    for (const auto& c : cases) {
        auto r = optimal_probability(c.src, c.tgt, c.mode, c.ppt);
        EXPECT_NEAR(r.value, c.expect, 1e-6) << c.src << " -> " << c.tgt << " " << to_string(c.mode);
        if (r.method == "sdp") {
            EXPECT_EQ(r.sdp.status, SolveStatus::Optimal);
            EXPECT_LE(std::abs(r.sdp.gap), 1e-6);
        }
    }
}

TEST(OptimalProbability, SolutionIsPrimalFeasible) {
    auto r = optimal_probability("ghz3", "w3", Mode::TNP);
    ConversionSpec spec{qubit_space(3, 3), projector(ghz(3)), projector(w3()), Mode::TNP, {}};
    auto pc = check_primal(spec, r.omega, nullptr, {});
    for (const auto& m : pc.margins) EXPECT_GE(m.value, -1e-7) << m.name;
    EXPECT_NEAR(success_probability(r.omega, spec.rho, spec.sigma).probability, 0.8, 1e-6);
}

TEST(OptimalProbability, UnknownStateAndMixedTarget) {
    EXPECT_THROW(optimal_probability("bell", "phi2", Mode::TP), std::invalid_argument);
    EXPECT_THROW(optimal_probability("phi2", "werner2", Mode::TP), std::invalid_argument);
}

TEST(TpFromTnp, CompletesBipartiteTnpMap) {
    auto cert = bipartite_certificate(2, 3, Mode::TNP);
    ASSERT_TRUE(cert.omega.has_value());
    auto r = tp_from_tnp(cert.spec, *cert.omega);
    ASSERT_TRUE(r.ok);
    EXPECT_GT(r.epsilon, 0.0);
    EXPECT_LE(r.epsilon, 1.0);
    // a TP map cannot beat the TP optimum
    double p = success_probability(r.omega, cert.spec.rho, cert.spec.sigma).probability;
    EXPECT_LE(p, mes_tp(2, 3) + 1e-9);
    EXPECT_NEAR(p, r.epsilon * mes_tnp(2, 3), 1e-9);
}

TEST(ProblemJson, SdpRoundTrip) {
    auto spec = iso_spec(2, 3, 0.9, Mode::TP);
    auto cp = build_conversion_problem(spec, iso_iso(2, 3));
    json j = sdp_to_json(cp.sdp);
    EXPECT_EQ(j["schema"], 1);
    SdpProblem back = sdp_from_json(json::parse(j.dump()));
    auto a = solve_sdp(cp.sdp), b = solve_sdp(back);
    EXPECT_EQ(a.status, b.status);
    EXPECT_NEAR(a.objective, b.objective, 1e-12);
}

TEST(ProblemJson, LpRoundTripKeepsInfiniteBounds) {
    LpProblem lp = bipartite_lp(3, 4, Mode::TNP);
    LpProblem back = lp_from_json(json::parse(lp_to_json(lp).dump()));
    EXPECT_TRUE(std::isinf(back.lb(0)));
    EXPECT_NEAR(solve_lp(back).objective, mes_tnp(3, 4), 1e-12);
}

TEST(ProblemJson, MalformedInputRejected) {
    EXPECT_THROW(sdp_from_json(json{{"kind", "lp"}}), std::invalid_argument);
    EXPECT_THROW(matrix_from_json(json{{"dim", 2}, {"entries", json::array({{1, 0}})}}), std::invalid_argument);
}
