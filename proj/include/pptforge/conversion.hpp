#pragma once

#include "core.hpp"
#include "lp.hpp"
#include "multipartite.hpp"
#include "sdp.hpp"
#include "symmetry.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pptforge {

enum class Mode { TP, TNP, None };

inline const char* to_string(Mode m) {
    switch (m) {
        case Mode::TP: return "tp";
        case Mode::TNP: return "tnp";
        case Mode::None: return "none";
    }
    return "?";
}

inline Mode parse_mode(const std::string& s) {
    if (s == "tp") return Mode::TP;
    if (s == "tnp") return Mode::TNP;
    if (s == "none") return Mode::None;
    throw std::invalid_argument("unknown mode '" + s + "' (expected tp, tnp or none)");
}

struct ConversionSpec {
    ChoiSpace space;
    Mat rho;    // on V
    Mat sigma;  // pure, on V'
    Mode mode = Mode::TP;
    std::vector<std::string> ppt_parties;  // empty: every party
};

inline std::vector<std::string> effective_ppt_parties(const ConversionSpec& s) {
    return s.ppt_parties.empty() ? s.space.parties() : s.ppt_parties;
}

// ---- primal feasibility check ----

struct Margin {
    std::string name;
    std::string kind;  // "psd" (min eigenvalue) or "eq" (residual)
    double value;
    double bound;      // psd: -allowance; eq: tolerance
    bool pass;
};

inline Margin psd_margin(const std::string& name, const Mat& m, const ToleranceConfig& tol) {
    auto r = is_psd(m, tol);
    double allow = tol.psd_abs + tol.psd_rel * spectral_norm(m);
    return {name, "psd", r.min_eigenvalue, -allow, r.psd};
}

inline Margin eq_margin(const std::string& name, double residual, const ToleranceConfig& tol) {
    return {name, "eq", residual, tol.eq_tol, std::abs(residual) <= tol.eq_tol};
}

struct PrimalCheck {
    std::vector<Margin> margins;
    double objective = 0.0;
    double leakage = 0.0;
    bool pass = true;
};

// Checks Omega (and omega_V in TP mode) against every cone and equality of the problem.
// omega_v == nullptr in TP mode means omega_V = 1 - tr_V' Omega.
inline PrimalCheck check_primal(const ConversionSpec& s, const Mat& omega, const Mat* omega_v,
                                const ToleranceConfig& tol = {}) {
    const auto& cs = s.space;
    if (omega.rows() != cs.dim()) throw std::invalid_argument("check_primal: Omega dimension mismatch");
    PrimalCheck pc;
    pc.margins.push_back(eq_margin("hermiticity", max_abs(omega - omega.adjoint()), tol));
    auto sp = success_probability(omega, s.rho, s.sigma);
    pc.objective = sp.probability;
    pc.leakage = sp.leakage;
    pc.margins.push_back(eq_margin("exactness", sp.leakage, tol));
    Mat t = cs.gamma_v(omega);
    pc.margins.push_back(psd_margin("T", t, tol));
    for (const auto& p : effective_ppt_parties(s)) pc.margins.push_back(psd_margin("T^G" + p, cs.party_pt(t, p), tol));
    const int din = cs.din();
    Mat tro = cs.trace_output(omega);
    Mat one = Mat::Identity(din, din);
    if (s.mode == Mode::TP) {
        Mat wv = omega_v ? *omega_v : Mat(one - tro);
        if (omega_v) pc.margins.push_back(eq_margin("trace-preservation", max_abs(tro + wv - one), tol));
        Mat wt = wv.transpose();
        pc.margins.push_back(psd_margin("omega", wt, tol));
        for (const auto& p : effective_ppt_parties(s)) {
            auto f = cs.input_party_factors(p);
            if (f.empty()) continue;
            pc.margins.push_back(psd_margin("omega^G" + p, partial_transpose(wt, cs.input().dims(), f), tol));
        }
    } else if (s.mode == Mode::TNP) {
        pc.margins.push_back(psd_margin("trace-nonincrease", Mat(one - tro), tol));
    }
    for (const auto& m : pc.margins) pc.pass = pc.pass && m.pass;
    return pc;
}

// ---- problem builder ----

struct ConversionProblem {
    ConversionSpec spec;
    std::vector<Mat> basis;  // Omega = sum_k x_k basis[k]
    SdpProblem sdp;
    int kernel_dim = 0;      // size of the compressed T block

    Mat omega(const RVec& x) const {
        Mat o = Mat::Zero(spec.space.dim(), spec.space.dim());
        for (size_t k = 0; k < basis.size(); ++k) o += x(static_cast<int>(k)) * basis[k];
        return (o + o.adjoint()) / 2.0;
    }
};

inline ConversionProblem build_conversion_problem(const ConversionSpec& spec, const std::vector<Mat>& basis) {
    const auto& cs = spec.space;
    const int n = cs.dim();
    if (spec.rho.rows() != cs.din() || spec.sigma.rows() != cs.dout())
        throw std::invalid_argument("build_conversion_problem: state dimension mismatch");
    for (const auto& b : basis)
        if (b.rows() != n) throw std::invalid_argument("symmetry space mismatch: basis operator has dimension " +
                                                       std::to_string(b.rows()) + ", problem needs " + std::to_string(n));
    for (const auto& p : effective_ppt_parties(spec)) cs.party_factors(p);  // validates labels

    ConversionProblem cp;
    cp.spec = spec;
    cp.basis = basis;
    const int m = static_cast<int>(basis.size());
    SdpProblem& sdp = cp.sdp;
    sdp = SdpProblem(m);
    for (int k = 0; k < m; ++k) sdp.var_names.push_back("x" + std::to_string(k));

    const int dout = cs.dout(), din = cs.din();
    Mat sig_perp = Mat::Identity(dout, dout) - spec.sigma;
    Mat q = kron(spec.rho.transpose(), sig_perp);
    auto eq = hermitian_eig(q);
    const double qmax = std::max(1.0, eq.values.cwiseAbs().maxCoeff());
    std::vector<int> rng, ker;
    for (int i = 0; i < n; ++i) (eq.values(i) > 1e-10 * qmax ? rng : ker).push_back(i);
    Mat R(n, rng.size()), K(n, ker.size());
    for (size_t i = 0; i < rng.size(); ++i) R.col(i) = eq.vectors.col(rng[i]);
    for (size_t i = 0; i < ker.size(); ++i) K.col(i) = eq.vectors.col(ker[i]);
    cp.kernel_dim = static_cast<int>(ker.size());

    std::vector<Mat> tk(m);
    for (int k = 0; k < m; ++k) {
        tk[k] = cs.gamma_v(basis[k]);
        sdp.c(k) = (basis[k] * kron(spec.rho, spec.sigma)).trace().real();
    }

    // exactness: T R = 0 (facial reduction of tr{T rho^T (x) (1 - sigma)} = 0 with T >= 0)
    if (!rng.empty()) {
        const int rows = 2 * n * static_cast<int>(rng.size());
        RMat E(rows, m);
        for (int k = 0; k < m; ++k) {
            Mat g = tk[k] * R;
            Eigen::Map<const Eigen::VectorXcd> v(g.data(), g.size());
            E.col(k) << v.real(), v.imag();
        }
        // keep an orthonormal row basis only
        Eigen::JacobiSVD<RMat> svd(E, Eigen::ComputeThinV);
        const RVec& sv = svd.singularValues();
        int r = 0;
        for (Eigen::Index i = 0; i < sv.size(); ++i)
            if (sv(i) > 1e-10 * std::max(1.0, sv(0))) ++r;
        sdp.E = svd.matrixV().leftCols(r).transpose();
        sdp.f = RVec::Zero(r);
    }

    {
        auto& b = sdp.add_block("T", Mat::Zero(K.cols(), K.cols()));
        for (int k = 0; k < m; ++k) b.F[k] = K.adjoint() * tk[k] * K;
    }
    for (const auto& p : effective_ppt_parties(spec)) {
        auto& b = sdp.add_block("T^G" + p, Mat::Zero(n, n));
        for (int k = 0; k < m; ++k) b.F[k] = cs.party_pt(tk[k], p);
    }
    Mat one = Mat::Identity(din, din);
    if (spec.mode == Mode::TP) {
        // omega_V^T = 1 - tr_V' T
        std::vector<Mat> trk(m);
        for (int k = 0; k < m; ++k) trk[k] = cs.trace_output(tk[k]);
        {
            auto& b = sdp.add_block("omega", one);
            for (int k = 0; k < m; ++k) b.F[k] = -trk[k];
        }
        for (const auto& p : effective_ppt_parties(spec)) {
            auto f = cs.input_party_factors(p);
            if (f.empty()) continue;
            auto& b = sdp.add_block("omega^G" + p, one);
            for (int k = 0; k < m; ++k) b.F[k] = -partial_transpose(trk[k], cs.input().dims(), f);
        }
    } else if (spec.mode == Mode::TNP) {
        auto& b = sdp.add_block("trace-nonincrease", one);
        for (int k = 0; k < m; ++k) b.F[k] = -cs.trace_output(basis[k]);
    }
    return cp;
}

inline ConversionProblem build_conversion_problem(const ConversionSpec& spec, const SymmetryGroup& g) {
    if (g.dim() != spec.space.dim())
        throw std::invalid_argument("symmetry space mismatch: group acts on dimension " + std::to_string(g.dim()) +
                                    ", problem needs " + std::to_string(spec.space.dim()));
    Mat rs = kron(spec.rho, spec.sigma);
    if (max_abs(average_project(rs, g) - rs) > 1e-9)
        throw std::invalid_argument("symmetry does not leave the source/target pair invariant");
    return build_conversion_problem(spec, invariant_basis(g).ops);
}

// Unreduced problem over a full Hermitian basis of V (x) V'.
inline ConversionProblem build_conversion_problem(const ConversionSpec& spec) {
    const int n = spec.space.dim();
    if (n > 32)
        throw std::invalid_argument("unreduced problem of dimension " + std::to_string(n) +
                                    " is too large; supply a symmetry");
    return build_conversion_problem(spec, full_hermitian_basis(n));
}

// ---- LP reduction ----

// If every block's matrices commute, the PSD constraints become scalar rows in a common
// eigenbasis. Returns nullopt otherwise.
inline std::optional<LpProblem> reduce_to_lp(const SdpProblem& p, double tol = 1e-9) {
    const int m = p.num_vars();
    LpProblem lp(m);
    lp.c = p.c;
    lp.lb = RVec::Constant(m, -std::numeric_limits<double>::infinity());
    lp.var_names = p.var_names;
    std::vector<std::vector<double>> seen;
    for (const auto& b : p.blocks) {
        const int n = static_cast<int>(b.F0.rows());
        if (n == 0) continue;
        // generic combination; its eigenbasis diagonalizes the family if they commute
        Mat g = b.F0;
        for (int i = 0; i < m; ++i) g += (0.37 + 0.61 * std::sin(1.3 * (i + 1))) * b.F[i];
        auto e = hermitian_eig(g);
        const Mat& u = e.vectors;
        auto diag_of = [&](const Mat& a, RVec& d) {
            Mat r = u.adjoint() * a * u;
            d = r.diagonal().real();
            r.diagonal().setZero();
            return max_abs(r) <= tol * std::max(1.0, max_abs(a));
        };
        RVec d0;
        if (!diag_of(b.F0, d0)) return std::nullopt;
        std::vector<RVec> di(m);
        for (int i = 0; i < m; ++i)
            if (!diag_of(b.F[i], di[i])) return std::nullopt;
        for (int j = 0; j < n; ++j) {
            RVec row(m);
            for (int i = 0; i < m; ++i) row(i) = di[i](j);
            double sc = std::max(std::abs(d0(j)), row.cwiseAbs().maxCoeff());
            if (sc < 1e-12) continue;
            std::vector<double> key{std::round(d0(j) / sc * 1e9)};
            for (int i = 0; i < m; ++i) key.push_back(std::round(row(i) / sc * 1e9));
            if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
            seen.push_back(key);
            // F0 + row.x >= 0  <=>  -row.x <= F0
            lp.add_le(-row, d0(j), b.name + "[" + std::to_string(j) + "]");
        }
    }
    lp.E = p.E;
    lp.f = p.f;
    return lp;
}

// ---- bipartite isotropic LP (variables a1, a2, a4) ----

inline LpProblem bipartite_lp(int d, int dp, Mode mode) {
    if (d < 2 || dp < 2) throw std::invalid_argument("bipartite_lp: d, d' >= 2 required");
    if (mode == Mode::None) throw std::invalid_argument("bipartite_lp: mode must be tp or tnp");
    LpProblem lp(3);
    lp.var_names = {"a1", "a2", "a4"};
    lp.c << 1, 0, 0;
    auto row = [](double x, double y, double z) { RVec r(3); r << x, y, z; return r; };
    const double D = d, P = dp;
    lp.add_le(row(1, 0, 0), 1, "1 >= a1");
    lp.add_ge(row(1, 0, 0), 0, "a1 >= 0");
    lp.add_ge(row(0, 1, 0), 0, "a2 >= 0");
    lp.add_ge(row(0, 0, 1), 0, "a4 >= 0");
    lp.add_le(row(0, 1, 1), 1, "1 >= a2 + a4");
    lp.add_ge(row(P + 1, (P + 1) * (D - 1), D - 1), 0, "Omega PPT 1");
    lp.add_ge(row(-(P + 1), (P + 1) * (D + 1), D + 1), 0, "Omega PPT 2");
    lp.add_ge(row(-(P - 1), -(P - 1) * (D - 1), D - 1), 0, "Omega PPT 3");
    lp.add_ge(row(P - 1, -(P - 1) * (D + 1), D + 1), 0, "Omega PPT 4");
    if (mode == Mode::TP) {
        lp.add_ge(row(-1, -(D - 1), -(D - 1)), -D, "omega PPT 1");
        lp.add_ge(row(1, -(D + 1), -(D + 1)), -D, "omega PPT 2");
    }
    lp.lb = RVec::Constant(3, -std::numeric_limits<double>::infinity());
    return lp;
}

// Omega from (a1, a2, a3, a4) in the isotropic parametrization
inline Mat bipartite_omega(int d, int dp, double a1, double a2, double a3, double a4) {
    Mat p = projector(phi_plus(d)), pp = projector(phi_plus(dp));
    Mat q = Mat::Identity(d * d, d * d) - p, qp = Mat::Identity(dp * dp, dp * dp) - pp;
    const double s = 1.0 / (double(dp) * dp - 1.0);
    return a1 * kron(p, pp) + a2 * kron(q, pp) + a3 * s * kron(p, qp) + a4 * s * kron(q, qp);
}

// ---- registered symmetries ----

inline ChoiSpace bipartite_space(int d, int dp) {
    return ChoiSpace(TensorSpace({{"A", d}, {"B", d}}), TensorSpace({{"A", dp}, {"B", dp}}));
}

inline ChoiSpace qubit_space(int nin, int nout) {
    return ChoiSpace(TensorSpace::qubits(nin), TensorSpace::qubits(nout));
}

// GHZ stabilizer-type generators on one side, W generators on the other, plus joint S3.
inline std::vector<Mat> ghz_w_generators(bool ghz_on_v) {
    Mat X(2, 2), Z(2, 2), I2 = Mat::Identity(2, 2);
    X << 0, 1, 1, 0;
    Z << 1, 0, 0, -1;
    Mat P1 = Mat::Zero(2, 2), P2 = Mat::Zero(2, 2);
    P1(0, 0) = 1;
    P1(1, 1) = std::polar(1.0, 2.0 * M_PI / 3.0);
    P2(0, 0) = I_UNIT;
    P2(1, 1) = -1;
    auto k3 = [](const Mat& a, const Mat& b, const Mat& c) { return kron(kron(a, b), c); };
    std::vector<Mat> g_ghz{k3(X, X, X), k3(Z, Z, I2), k3(I2, Z, Z), k3(P1, P1, P1)};
    std::vector<Mat> g_w{k3(Z, Z, Z), k3(P2, P2, P2)};
    Mat I8 = Mat::Identity(8, 8);
    std::vector<Mat> gens;
    for (const auto& g : ghz_on_v ? g_ghz : g_w) gens.push_back(kron(g, I8));
    for (const auto& g : ghz_on_v ? g_w : g_ghz) gens.push_back(kron(I8, g));
    gens.push_back(qubit_permutation(6, {1, 0, 2, 4, 3, 5}));
    gens.push_back(qubit_permutation(6, {1, 2, 0, 4, 5, 3}));
    return gens;
}

inline const SymmetryGroup& ghz_w_group(bool ghz_on_v) {
    static const SymmetryGroup a = generate_group(ghz_w_generators(true));
    static const SymmetryGroup b = generate_group(ghz_w_generators(false));
    return ghz_on_v ? a : b;
}

// Symmetries of P+_AB (x) GHZ_ABC: U (x) U* phases/flips on V, GHZ phases and flips on V',
// joint exchange of A and B.
inline const SymmetryGroup& unlock_group() {
    static const SymmetryGroup g = [] {
        Mat X(2, 2), I2 = Mat::Identity(2, 2), S = Mat::Zero(2, 2), Sc = Mat::Zero(2, 2);
        X << 0, 1, 1, 0;
        S(0, 0) = 1;
        S(1, 1) = I_UNIT;
        Sc = S.conjugate();
        Mat I4 = Mat::Identity(4, 4), I8 = Mat::Identity(8, 8);
        std::vector<Mat> gens{kron(kron(X, X), I8), kron(kron(S, Sc), I8),
                              kron(I4, kron(kron(X, X), X)), kron(I4, kron(kron(S, Sc), I2)),
                              kron(I4, kron(kron(I2, S), Sc)), qubit_permutation(5, {1, 0, 3, 2, 4})};
        return generate_group(gens);
    }();
    return g;
}

// ---- named states ----

struct NamedState {
    std::string name;
    TensorSpace space;
    Mat rho;
    bool pure = true;
};

// ghz<N> (ghz3), w3, phi<d> (phi2: P+_d on A,B), werner<d> (antisymmetric Werner state)
inline NamedState named_state(const std::string& name) {
    auto num = [&](size_t off) {
        std::string t = name.substr(off);
        if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos)
            throw std::invalid_argument("unknown state '" + name + "'");
        return std::stoi(t);
    };
    if (name == "w3") return {name, TensorSpace::qubits(3), projector(w3()), true};
    if (name.rfind("ghz", 0) == 0) {
        int n = num(3);
        if (n < 2 || n > 8) throw std::invalid_argument("ghz<N> needs 2 <= N <= 8");
        return {name, TensorSpace::qubits(n), projector(ghz(n)), true};
    }
    if (name.rfind("phi", 0) == 0) {
        int d = num(3);
        if (d < 2) throw std::invalid_argument("phi<d> needs d >= 2");
        return {name, TensorSpace({{"A", d}, {"B", d}}), projector(phi_plus(d)), true};
    }
    if (name.rfind("werner", 0) == 0) {
        int d = num(6);
        if (d < 2) throw std::invalid_argument("werner<d> needs d >= 2");
        return {name, TensorSpace({{"A", d}, {"B", d}}), werner_antisym(d), false};
    }
    throw std::invalid_argument("unknown state '" + name + "'");
}

struct ProbabilityResult {
    double value = 0.0;
    std::string method;   // "lp" or "sdp"
    std::string symmetry; // registered symmetry used, or "none"
    int variables = 0;
    SdpReport sdp;
    LpReport lp;
    Mat omega;
};

// Registered symmetry for a source/target pair, if any.
inline std::optional<std::pair<std::string, SymmetryGroup>> registered_symmetry(const std::string& src,
                                                                                const std::string& tgt,
                                                                                const ChoiSpace& cs) {
    auto is = [](const std::string& s, const char* p) { return s.rfind(p, 0) == 0; };
    auto jd = cs.joint_dims();
    if (jd.size() == 4 && is(tgt, "phi")) {
        if (is(src, "phi"))
            return std::pair{std::string("isotropic x isotropic"),
                             SymmetryGroup::twirls(jd, {{Twirl::Kind::Isotropic, 0, 1}, {Twirl::Kind::Isotropic, 2, 3}})};
        if (is(src, "werner"))
            return std::pair{std::string("werner x isotropic"),
                             SymmetryGroup::twirls(jd, {{Twirl::Kind::Werner, 0, 1}, {Twirl::Kind::Isotropic, 2, 3}})};
    }
    if (src == "ghz3" && tgt == "w3") return std::pair{std::string("ghz-w"), ghz_w_group(true)};
    if (src == "w3" && tgt == "ghz3") return std::pair{std::string("w-ghz"), ghz_w_group(false)};
    if (src == "phi2" && tgt == "ghz3") return std::pair{std::string("unlock"), unlock_group()};
    return std::nullopt;
}

inline SdpOptions default_sdp_options(const ToleranceConfig& tol) {
    SdpOptions o;
    o.tol = std::min(1e-9, tol.gap_tol * 0.01);
    return o;
}

inline ProbabilityResult solve_conversion(const ConversionProblem& cp, const ToleranceConfig& tol = {}) {
    ProbabilityResult r;
    r.variables = cp.sdp.num_vars();
    r.sdp = solve_sdp(cp.sdp, default_sdp_options(tol));
    r.method = "sdp";
    r.value = r.sdp.objective;
    r.omega = cp.omega(r.sdp.x);
    return r;
}

inline ProbabilityResult optimal_probability(const std::string& source, const std::string& target, Mode mode,
                                             const std::vector<std::string>& ppt_parties = {},
                                             const ToleranceConfig& tol = {}) {
    NamedState s = named_state(source), t = named_state(target);
    if (!t.pure) throw std::invalid_argument("target state must be pure");
    ConversionSpec spec{ChoiSpace(s.space, t.space), s.rho, t.rho, mode, ppt_parties};
    auto sym = registered_symmetry(source, target, spec.space);
    if (sym && sym->first == "isotropic x isotropic" && mode != Mode::None) {
        // fully reduced: the isotropic LP
        ProbabilityResult r;
        r.method = "lp";
        r.symmetry = sym->first;
        const int d = spec.space.input().dims()[0], dp = spec.space.output().dims()[0];
        LpProblem lp = bipartite_lp(d, dp, mode);
        r.lp = solve_lp(lp);
        r.variables = lp.num_vars();
        r.value = r.lp.objective;
        if (r.lp.status == SolveStatus::Optimal)
            r.omega = bipartite_omega(d, dp, r.lp.x(0), r.lp.x(1), 0.0, r.lp.x(2));
        return r;
    }
    ConversionProblem cp = sym ? build_conversion_problem(spec, sym->second) : build_conversion_problem(spec);
    ProbabilityResult r = solve_conversion(cp, tol);
    r.symmetry = sym ? sym->first : "none";
    return r;
}

// ---- TP map from a TNP map ----

struct TpFromTnp {
    bool ok = false;
    double epsilon = 0.0;
    Mat omega;    // epsilon * Omega
    Mat omega_v;  // V-part of the completion; full completion is omega_v (x) 1/dim V'
    PrimalCheck check;
};

inline TpFromTnp tp_from_tnp(const ConversionSpec& spec, const Mat& omega, const ToleranceConfig& tol = {}) {
    const auto& cs = spec.space;
    const int din = cs.din();
    Mat one = Mat::Identity(din, din);
    Mat wv = one - cs.trace_output(omega);
    auto parties = effective_ppt_parties(spec);
    auto feasible = [&](double eps) {
        Mat w = eps * wv + (1.0 - eps) * one;
        if (min_eig(w) < -1e-12) return false;
        for (const auto& p : parties) {
            auto f = cs.input_party_factors(p);
            if (f.empty()) continue;
            if (min_eig(partial_transpose(Mat(w.transpose()), cs.input().dims(), f)) < -1e-12) return false;
        }
        return true;
    };
    TpFromTnp r;
    double lo = 0.0, hi = 1.0;
    if (feasible(1.0)) {
        lo = 1.0;
    } else {
        while (hi - lo > 1e-9) {
            double mid = 0.5 * (lo + hi);
            (feasible(mid) ? lo : hi) = mid;
        }
    }
    if (lo < 1e-12) return r;
    r.epsilon = lo;
    r.omega = lo * omega;
    r.omega_v = lo * wv + (1.0 - lo) * one;
    ConversionSpec tp = spec;
    tp.mode = Mode::TP;
    r.check = check_primal(tp, r.omega, &r.omega_v, tol);
    r.ok = r.check.pass;
    return r;
}

}  // namespace pptforge
