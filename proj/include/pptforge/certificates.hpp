#pragma once

#include "conversion.hpp"

#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace pptforge {

// ---- constants ----

struct Constant {
    std::string name;
    std::string expr;
    double value;
};

inline const std::vector<Constant>& constant_registry() {
    static const std::vector<Constant> reg = [] {
        std::vector<Constant> r;
        const double s3 = std::sqrt(3.0);
        const double x = (-2.0 + std::cbrt(18.0 - 6.0 * s3) + std::cbrt(18.0 + 6.0 * s3)) / 8.0;
        const double b1 = (1.0 + std::sqrt(1.0 - 4.0 * x * x)) / 6.0;
        const double b2 = x / 3.0;
        const double b4 = b2 * b2 / b1;
        const double b6 = 9.0 * b4 * b4 / (3.0 * x);
        r.push_back({"x", "(-2 + cbrt(18 - 6 sqrt3) + cbrt(18 + 6 sqrt3)) / 8", x});
        r.push_back({"b1", "(1 + sqrt(1 - 4 x^2)) / 6", b1});
        r.push_back({"b2", "x / 3", b2});
        r.push_back({"b4", "b2^2 / b1", b4});
        r.push_back({"b6", "9 b4^2 / (3 x)", b6});
        r.push_back({"p_ghz_w_tp", "6 b2", 6.0 * b2});
        r.push_back({"tnp.b1", "0.8 / 3", 0.8 / 3.0});
        r.push_back({"tnp.b2", "0.8 / 6", 0.8 / 6.0});
        r.push_back({"tnp.b3", "0.8 / 12", 0.8 / 12.0});
        r.push_back({"wg.b1", "1 / 6", 1.0 / 6.0});
        r.push_back({"wg.b2", "2 / 9", 2.0 / 9.0});
        r.push_back({"wg.b3", "1 / 18", 1.0 / 18.0});
        r.push_back({"wg.c1", "11 / 90", 11.0 / 90.0});
        r.push_back({"wg.c2", "7 / 90", 7.0 / 90.0});
        r.push_back({"dualA.y47", "(-42 + sqrt(159559)) / 1200", (-42.0 + std::sqrt(159559.0)) / 1200.0});
        r.push_back({"x0_unlock", "3", 3.0});
        return r;
    }();
    return reg;
}

inline double constant(const std::string& name) {
    for (const auto& c : constant_registry())
        if (c.name == name) return c.value;
    throw std::invalid_argument("unknown constant " + name);
}

// ---- certificate data ----

struct DualData {
    Mode mode = Mode::TNP;
    Mat lambda_p, lambda_e, lambda_ep;   // on V; empty when absent
    std::map<std::string, Mat> lambda;   // PSD multipliers of the T^{G_i} cones, on V (x) V'
    std::map<std::string, Mat> mu;       // PSD multipliers of the omega^{G_i} cones, on V
    double nu = 0.0;
    bool search_nu = false;              // nu found by a 1-D search over nu > nu_floor
    double nu_floor = 2.0;
};

struct Certificate {
    std::string name;
    std::string problem_tag;
    ConversionSpec spec;
    std::optional<Mat> omega;
    std::optional<Mat> omega_v;
    std::optional<DualData> dual;
    double claimed_value = 0.0;
    std::vector<std::string> notes;
};

struct VerificationReport {
    std::string certificate;
    std::string part;  // "primal" or "dual"
    std::vector<Margin> margins;
    double objective = 0.0;
    double claimed = 0.0;
    double gap = 0.0;  // objective - claimed
    double value_tol = 1e-9;
    bool pass = false;
    std::optional<double> nu;
    std::vector<std::string> notes;

    const Margin* worst() const {
        const Margin* w = nullptr;
        for (const auto& m : margins)
            if (!m.pass && (!w || m.value < w->value)) w = &m;
        return w;
    }
};

namespace detail {

inline int bits_index(const std::string& s) { return std::stoi(s, nullptr, 2); }

// 1-based numeric indices of the transcribed data count party A as the least significant bit inside V and V'.
inline Mat lsb_to_msb(const Mat& m) {
    const int n = static_cast<int>(m.rows());
    const int nq = static_cast<int>(std::lround(std::log2(n)));
    std::vector<int> p(nq);
    if (nq == 6) p = {2, 1, 0, 5, 4, 3};
    else if (nq == 3) p = {2, 1, 0};
    else throw std::invalid_argument("lsb_to_msb: unsupported size");
    Mat q = qubit_permutation(nq, p);
    return q * m * q.adjoint();
}

struct Entry {
    std::string row, col;
    double value;
};

// Spreads the listed elements over their group orbits (and Hermitian conjugates).
inline Mat complete_by_orbits(const std::vector<Entry>& entries, const SymmetryGroup& g) {
    const int n = g.dim();
    if (g.monomials().empty()) throw std::invalid_argument("orbit completion needs a monomial group");
    Mat a = Mat::Zero(n, n);
    std::vector<char> set(size_t(n) * n, 0);
    auto put = [&](int r, int c, cplx v) {
        size_t k = size_t(r) * n + c;
        if (set[k]) {
            if (std::abs(a(r, c) - v) > 1e-9)
                throw std::logic_error("orbit completion conflict at (" + std::to_string(r) + "," +
                                       std::to_string(c) + ")");
        } else {
            a(r, c) = v;
            set[k] = 1;
        }
    };
    for (const auto& e : entries) {
        const int r = bits_index(e.row), c = bits_index(e.col);
        for (const auto& m : g.monomials()) {
            int r2 = m.perm[r], c2 = m.perm[c];
            cplx v = m.phase[r] * e.value * std::conj(m.phase[c]);
            put(r2, c2, v);
            put(c2, r2, std::conj(v));
        }
    }
    return a;
}

inline Mat sym_entries(int n, const std::vector<std::tuple<int, int, double>>& e) {
    Mat m = Mat::Zero(n, n);
    for (auto [i, j, v] : e) {
        m(i - 1, j - 1) = v;
        m(j - 1, i - 1) = v;
    }
    return m;
}

inline Mat cyc() { return qubit_permutation(6, {1, 2, 0, 4, 5, 3}); }

// lambda_B, lambda_C as cyclic images of lambda_A
inline std::map<std::string, Mat> cyclic_lambdas(const Mat& la) {
    Mat c = cyc(), c2 = c * c;
    return {{"A", la}, {"B", c * la * c.adjoint()}, {"C", c2 * la * c2.adjoint()}};
}

inline ConversionSpec ghz_w_spec(bool ghz_to_w, Mode mode) {
    Mat g = projector(ghz(3)), w = projector(w3());
    return {qubit_space(3, 3), ghz_to_w ? g : w, ghz_to_w ? w : g, mode, {"A", "B", "C"}};
}

}  // namespace detail

// ---- individual builders ----

inline Certificate ghz_w_tp_primal(bool corrupt = false) {
    const double b1 = constant("b1"), b4 = constant("b4"), b6 = constant("b6");
    const double b2 = corrupt ? -constant("b2") : constant("b2");
    std::vector<detail::Entry> e{
        {"000000", "000000", b1}, {"001000", "001000", b1}, {"000000", "111000", -b1},
        {"001001", "001001", b2}, {"001001", "001010", -b2}, {"001001", "001100", -b2},
        {"001010", "001010", b2}, {"001010", "001100", b2}, {"001100", "001100", b2},
        {"001011", "001011", b4}, {"001011", "001101", b4}, {"001011", "001110", -b4},
        {"001101", "001101", b4}, {"001101", "001110", -b4}, {"001110", "001110", b4},
        {"001111", "001111", 3 * b6}, {"000111", "000111", b6}, {"000111", "111111", -b6},
        {"000010", "111010", b2}, {"000010", "111100", b2}, {"000100", "111100", b2},
        {"000101", "111101", -b4}, {"000101", "111110", -b4}, {"000110", "111110", -b4}};
    for (const char* c : {"000001", "000010", "000100"}) e.push_back({"000001", c, b2});
    for (const char* c : {"000011", "000101", "000110"}) e.push_back({"000011", c, b4});
    for (const char* c : {"111001", "111010", "111100"}) e.push_back({"000001", c, b2});
    for (const char* c : {"111011", "111101", "111110"}) e.push_back({"000011", c, -b4});
    Certificate cert;
    cert.name = corrupt ? "ghz-w-tp-corrupt" : "ghz-w-tp";
    cert.problem_tag = "ghz3->w3 tp {A,B,C}";
    cert.spec = detail::ghz_w_spec(true, Mode::TP);
    cert.omega = detail::complete_by_orbits(e, ghz_w_group(true));
    cert.claimed_value = constant("p_ghz_w_tp");
    cert.notes.push_back("element Omega_{001011,001011} taken as +b4 (the printed sign is inconsistent with the symmetry orbit)");
    if (corrupt) cert.notes.push_back("falsification control: b2 negated");
    return cert;
}

inline Certificate ghz_w_tnp_primal() {
    const double b1 = constant("tnp.b1"), b2 = constant("tnp.b2"), b3 = constant("tnp.b3");
    std::vector<detail::Entry> e{
        {"001000", "001000", b1}, {"001111", "001111", b1 / 2},
        {"001001", "001010", -b2}, {"001001", "001100", -b2}, {"001010", "001100", b2},
        {"001011", "001101", b3}, {"001011", "001110", -b3}, {"001101", "001110", -b3},
        {"000000", "000000", b1}, {"000111", "000111", b1 / 8},
        {"000001", "000010", b2}, {"000001", "000100", b2}, {"000010", "000100", b2},
        {"000011", "000101", b3}, {"000011", "000110", b3}, {"000101", "000110", b3},
        {"000000", "111000", -b1}, {"000111", "111111", -b1 / 8}};
    for (const char* c : {"001001", "001010", "001100", "000001", "000010", "000100"}) e.push_back({c, c, b2});
    for (const char* c : {"001011", "001101", "001110", "000011", "000101", "000110"}) e.push_back({c, c, b3});
    for (auto [a, c] : std::vector<std::pair<const char*, const char*>>{
             {"000001", "111001"}, {"000010", "111010"}, {"000100", "111100"},
             {"000001", "111010"}, {"000001", "111100"}, {"000010", "111100"}})
        e.push_back({a, c, b2});
    for (auto [a, c] : std::vector<std::pair<const char*, const char*>>{
             {"000011", "111011"}, {"000101", "111101"}, {"000110", "111110"},
             {"000011", "111101"}, {"000011", "111110"}, {"000101", "111110"}})
        e.push_back({a, c, -b3});
    Certificate cert;
    cert.name = "ghz-w-tnp";
    cert.problem_tag = "ghz3->w3 tnp {A,B,C}";
    cert.spec = detail::ghz_w_spec(true, Mode::TNP);
    cert.omega = detail::complete_by_orbits(e, ghz_w_group(true));
    cert.claimed_value = 0.8;
    return cert;
}

inline Certificate ghz_w_tnp_dual() {
    const double v = 0.8 / 3.0;
    Mat lp = Mat::Zero(8, 8);
    lp(0, 0) = lp(7, 7) = 0.4;
    lp(0, 7) = lp(7, 0) = -0.4;
    std::vector<std::tuple<int, int, double>> e;
    for (int o : {0, 56}) {
        for (auto [i, j, x] : std::vector<std::tuple<int, int, double>>{
                 {1, 1, v}, {1, 4, -v}, {1, 6, -v}, {4, 4, v}, {6, 6, v}, {8, 8, v}, {4, 6, v}, {5, 5, v / 4}, {5, 8, -v / 2}})
            e.push_back({i + o, j + o, x});
    }
    Mat la = detail::lsb_to_msb(detail::sym_entries(64, e));
    Certificate cert;
    cert.name = "ghz-w-tnp-dual";
    cert.problem_tag = "ghz3->w3 tnp {A,B,C}";
    cert.spec = detail::ghz_w_spec(true, Mode::TNP);
    DualData d;
    d.mode = Mode::TNP;
    d.lambda_p = detail::lsb_to_msb(lp);
    d.lambda = detail::cyclic_lambdas(la);
    d.nu = 1.8;
    cert.dual = d;
    cert.claimed_value = 0.8;
    cert.notes.push_back("numeric indices read with party A as least significant bit");
    return cert;
}

inline Certificate w_ghz_tnp_primal() {
    const double b1 = constant("wg.b1"), b2 = constant("wg.b2"), b3 = constant("wg.b3");
    const double c1 = constant("wg.c1"), c2 = constant("wg.c2");
    std::vector<detail::Entry> e{
        {"000001", "000001", c1}, {"111001", "111001", c1},
        {"001001", "001001", b2}, {"010001", "010001", b2 / 4}, {"100001", "100001", b2 / 4},
        {"001001", "010001", -b2 / 2}, {"001001", "100001", -b2 / 2}, {"010001", "100001", b2 / 4},
        {"011001", "011001", b1}, {"101001", "101001", b1}, {"110001", "110001", b1 / 2},
        {"011001", "101001", b3}, {"011001", "110001", -b3 / 2}, {"101001", "110001", -b3 / 2},
        {"000000", "000000", b2 / 2}, {"111000", "111000", b2 / 2},
        {"001000", "010000", b3}, {"001000", "100000", b3}, {"010000", "100000", b3},
        {"011000", "101000", b3 / 2}, {"011000", "110000", b3 / 2}, {"101000", "110000", b3 / 2},
        {"000000", "000111", -c2}, {"111000", "111111", 1.0 / 9.0}};
    for (const char* c : {"001000", "010000", "100000"}) e.push_back({c, c, b3});
    for (const char* c : {"011000", "101000", "110000"}) e.push_back({c, c, b3 / 2});
    for (auto [a, c] : std::vector<std::pair<const char*, const char*>>{
             {"001000", "001111"}, {"010000", "010111"}, {"100000", "100111"},
             {"001000", "010111"}, {"001000", "100111"}, {"010000", "100111"}})
        e.push_back({a, c, b3});
    for (auto [a, c] : std::vector<std::pair<const char*, const char*>>{
             {"011000", "011111"}, {"101000", "101111"}, {"110000", "110111"},
             {"011000", "101111"}, {"011000", "110111"}, {"101000", "110111"}})
        e.push_back({a, c, -b3 / 2});
    Certificate cert;
    cert.name = "w-ghz-tnp";
    cert.problem_tag = "w3->ghz3 tnp {A,B,C}";
    cert.spec = detail::ghz_w_spec(false, Mode::TNP);
    cert.omega = detail::complete_by_orbits(e, ghz_w_group(false));
    cert.claimed_value = 1.0 / 3.0;
    cert.notes.push_back("last two element groups taken as -b3/2 (the printed +b3/2 violates the party cones)");
    return cert;
}

// W -> GHZ dual multiplier lambda_A (MSB order) and lambda_p for a given lambda_p22.
inline std::pair<Mat, Mat> w_ghz_dual_matrices(double lp22) {
    const double a = 0.1 / 9.0;
    Mat la = detail::sym_entries(64, {
        {18, 23, -0.2}, {34, 39, -0.2}, {18, 39, -0.3}, {34, 23, -0.3},
        {17, 17, a}, {33, 33, a}, {17, 33, -a},
        {18, 18, 0.3}, {34, 34, 0.3}, {18, 34, 0.2},
        {19, 19, a}, {35, 35, 4 * a}, {19, 35, 2 * a},
        {20, 20, 4 * a}, {36, 36, a}, {20, 36, 2 * a},
        {21, 21, 4 * a}, {37, 37, a}, {21, 37, 2 * a},
        {22, 22, a}, {38, 38, 4 * a}, {22, 38, 2 * a},
        {23, 23, 0.3}, {39, 39, 0.3}, {23, 39, 0.2},
        {24, 24, a}, {40, 40, a}, {24, 40, -a}});
    Mat lp = Mat::Zero(8, 8);
    for (int i : {1, 2, 4}) lp(i, i) = lp22;
    for (auto [i, j] : std::vector<std::pair<int, int>>{{1, 2}, {1, 4}, {2, 4}}) lp(i, j) = lp(j, i) = -lp22 / 2;
    return {detail::lsb_to_msb(la), detail::lsb_to_msb(lp)};
}

inline Certificate w_ghz_tnp_dual(double delta) {
    if (!(delta > 0)) throw std::invalid_argument("w-ghz-tnp-dual: delta must be > 0");
    auto [la, lp] = w_ghz_dual_matrices(1.0 / 9.0 + delta);
    Certificate cert;
    cert.name = "w-ghz-tnp-dual";
    cert.problem_tag = "w3->ghz3 tnp {A,B,C}";
    cert.spec = detail::ghz_w_spec(false, Mode::TNP);
    DualData d;
    d.mode = Mode::TNP;
    d.lambda_p = lp;
    d.lambda = detail::cyclic_lambdas(la);
    d.search_nu = true;
    d.nu_floor = 2.0;
    cert.dual = d;
    cert.claimed_value = 1.0 / 3.0 + 3.0 * delta;
    cert.notes.push_back("numeric indices read with party A as least significant bit");
    cert.notes.push_back("entry 4 lambda_{A 32,32} read as index 22");
    return cert;
}

namespace detail {

inline DualData ghz_w_tp_dual_common() {
    const double b2 = constant("b2");
    DualData d;
    d.mode = Mode::TP;
    d.lambda_p = Mat::Zero(8, 8);
    d.lambda_ep = Mat::Zero(8, 8);
    d.nu = 8.0 / 3.0;
    auto pair = [&](const char* u, const char* v) {
        Vec x = ket_bits(u) - ket_bits(v);
        return Mat(b2 * projector(x));
    };
    d.mu = {{"A", pair("100", "011")}, {"B", pair("010", "101")}, {"C", pair("001", "110")}};
    return d;
}

inline Mat printed_lambda_a_gamma() {
    const double y47 = constant("dualA.y47");
    RMat X = RMat::Zero(8, 8), Y = RMat::Zero(8, 8);
    auto sx = [&](int i, int j, double v) { X(i - 1, j - 1) = v; };
    auto sy = [&](int i, int j, double v) { Y(i - 1, j - 1) = v; };
    sx(1, 1, 1);
    for (auto [i, j] : std::vector<std::pair<int, int>>{{4, 4}, {6, 6}, {6, 4}, {4, 6}}) sx(i, j, 25.0 / 16);
    for (auto [i, j] : std::vector<std::pair<int, int>>{{2, 3}, {2, 5}, {3, 2}, {5, 2}}) sx(i, j, -5.0 / 4);
    for (int i : {1, 4, 6}) sy(i, i, -1.0 / 3);
    sy(2, 2, -1);
    sy(7, 7, 1);
    for (auto [i, j] : std::vector<std::pair<int, int>>{{2, 3}, {2, 5}, {3, 2}, {3, 3}, {3, 5}}) sy(i, j, -2.0 / 3);
    sy(4, 6, 2.0 / 3);
    sy(5, 2, -2.0 / 3);
    sy(5, 3, -2.0 / 3);
    sy(5, 5, 2.0 / 3);
    sy(6, 4, 2.0 / 3);
    sy(8, 8, 2.0 / 3);
    sy(6, 7, 7.0 / 80);
    sy(7, 6, 7.0 / 80);
    sy(7, 4, y47);
    sy(4, 7, y47);
    Mat m = Mat::Zero(64, 64);
    m.block(0, 0, 8, 8) = X.cast<cplx>();
    m.block(56, 56, 8, 8) = X.cast<cplx>();
    m.block(0, 56, 8, 8) = Y.cast<cplx>();
    m.block(56, 0, 8, 8) = Y.cast<cplx>();
    m.block(8, 8, 8, 8) = Mat::Identity(8, 8);
    m.block(48, 48, 8, 8) = Mat::Identity(8, 8);
    return lsb_to_msb(Mat(constant("b2") * m));
}

}  // namespace detail

inline Certificate ghz_w_tp_dual_printed() {
    const double b2 = constant("b2");
    DualData d = detail::ghz_w_tp_dual_common();
    Mat le = b2 * Mat::Identity(8, 8);
    le(0, 7) = le(7, 0) = -3 * b2;
    d.lambda_e = le;
    ChoiSpace cs = qubit_space(3, 3);
    d.lambda = detail::cyclic_lambdas(cs.party_pt(detail::printed_lambda_a_gamma(), "A"));
    Certificate cert;
    cert.name = "ghz-w-tp-dual-printed";
    cert.problem_tag = "ghz3->w3 tp {A,B,C}";
    cert.spec = detail::ghz_w_spec(true, Mode::TP);
    cert.dual = d;
    cert.claimed_value = constant("p_ghz_w_tp");
    cert.notes.push_back("transcribed as printed; feasible but its objective is tr(lambda_e) = 8 b2, not 6 b2");
    return cert;
}

struct LambdaSolve {
    Mat lambda_a;
    double t = 0.0;       // max margin found by the solver
    double shift = 0.0;   // delta added to lambda_e
    int invariant_dim = 0;
    size_t group_order = 0;
    SdpReport report;
};

// Re-solves lambda_A for the 6 b2 dual with lambda_e, mu, nu fixed, then shifts lambda_e by
// delta * 1 so the point is strictly feasible in floating point.
inline LambdaSolve solve_ghz_w_lambda_a(const DualData& base) {
    ChoiSpace cs = qubit_space(3, 3);
    Mat rho = projector(ghz(3)), sig = projector(w3());
    Mat I8 = Mat::Identity(8, 8);
    Mat c0 = kron(Mat((rho - base.lambda_e).transpose()), I8) - base.nu * kron(Mat(rho.transpose()), Mat(I8 - sig));
    // stabilizer of party A, acting on T-space (V generators conjugated)
    auto g6 = ghz_w_generators(true);
    std::vector<Mat> gens;
    for (int i = 0; i < 4; ++i) gens.push_back(g6[i].conjugate());
    for (int i = 4; i < 6; ++i) gens.push_back(g6[i]);
    gens.push_back(qubit_permutation(6, {0, 2, 1, 3, 5, 4}));
    SymmetryGroup ga = generate_group(gens);
    auto basis = invariant_basis(ga).ops;
    const int m = static_cast<int>(basis.size());
    Mat c = detail::cyc(), c2 = c * c;
    SdpProblem p(m + 1);
    p.c(m) = 1.0;
    auto& b1 = p.add_block("lambda_A", Mat::Zero(64, 64));
    for (int k = 0; k < m; ++k) b1.F[k] = cs.party_pt(basis[k], "A");
    auto& b2 = p.add_block("dual", Mat(-c0));
    for (int k = 0; k < m; ++k)
        b2.F[k] = -(basis[k] + c * basis[k] * c.adjoint() + c2 * basis[k] * c2.adjoint());
    b2.F[m] = -Mat::Identity(64, 64);
    SdpOptions opt;
    opt.tol = 1e-12;
    opt.max_iter = 25;
    LambdaSolve r;
    r.report = solve_sdp(p, opt);
    r.invariant_dim = m;
    r.group_order = ga.order();
    r.t = r.report.x(m);
    Mat lam = Mat::Zero(64, 64);
    for (int k = 0; k < m; ++k) lam += r.report.x(k) * basis[k];
    Mat la = cs.party_pt(lam, "A");
    auto e = hermitian_eig(Mat((la + la.adjoint()) / 2.0));
    RVec ev = e.values.cwiseMax(0.0);
    r.lambda_a = e.vectors * ev.asDiagonal() * e.vectors.adjoint();
    r.lambda_a = (r.lambda_a + r.lambda_a.adjoint()) / 2.0;
    Mat L = c0;
    for (auto& [party, l] : detail::cyclic_lambdas(r.lambda_a)) L += cs.party_pt(l, party);
    r.shift = std::max(0.0, max_eig(L)) + 1e-12;
    return r;
}

inline Certificate ghz_w_tp_dual() {
    const double b2 = constant("b2");
    DualData d = detail::ghz_w_tp_dual_common();
    Mat le = Mat::Zero(8, 8);
    for (int i = 1; i < 7; ++i) le(i, i) = b2;
    le(0, 7) = le(7, 0) = -3 * b2;
    d.lambda_e = le;
    static const LambdaSolve s = solve_ghz_w_lambda_a(d);
    d.lambda_e += s.shift * Mat::Identity(8, 8);
    d.lambda = detail::cyclic_lambdas(s.lambda_a);
    Certificate cert;
    cert.name = "ghz-w-tp-dual";
    cert.problem_tag = "ghz3->w3 tp {A,B,C}";
    cert.spec = detail::ghz_w_spec(true, Mode::TP);
    cert.dual = d;
    cert.claimed_value = constant("p_ghz_w_tp");
    std::ostringstream os;
    os.precision(3);
    os << "lambda_A re-solved over the party-A stabilizer (order " << s.group_order << ", invariant dimension "
       << s.invariant_dim << "); lambda_e shifted by " << s.shift;
    cert.notes.push_back(os.str());
    return cert;
}

// ---- bipartite, unlockable, Werner ----

inline Certificate bipartite_certificate(int d, int dp, Mode mode) {
    if (d < 2 || dp < d) throw std::invalid_argument("bipartite certificate needs d' >= d >= 2");
    Certificate cert;
    const double D = d, P = dp;
    if (mode == Mode::TP) {
        const double den = D * P + P - 2 * D;
        const double a1 = D * (D - 1) / den, a4 = D * (P - 1) / den;
        cert.omega = bipartite_omega(d, dp, a1, 0.0, 0.0, a4);
        cert.claimed_value = a1;
        cert.name = "bipartite-tp(" + std::to_string(d) + "," + std::to_string(dp) + ")";
    } else if (mode == Mode::TNP) {
        const double a1 = (D - 1) / (P - 1);
        cert.omega = bipartite_omega(d, dp, a1, 0.0, 0.0, 1.0);
        cert.claimed_value = a1;
        cert.name = "bipartite-tnp(" + std::to_string(d) + "," + std::to_string(dp) + ")";
    } else {
        throw std::invalid_argument("bipartite certificate: mode must be tp or tnp");
    }
    cert.spec = {bipartite_space(d, dp), projector(phi_plus(d)), projector(phi_plus(dp)), mode, {"A"}};
    cert.problem_tag = "phi" + std::to_string(d) + "->phi" + std::to_string(dp) + " " + to_string(mode) + " {A}";
    return cert;
}

inline Mat trial_omega(const Mat& psi, const Mat& phi, double x) {
    Mat a = Mat::Identity(psi.rows(), psi.rows()) - psi, b = Mat::Identity(phi.rows(), phi.rows()) - phi;
    return x * kron(psi, phi) + kron(a, b);
}

inline ChoiSpace unlock_space() { return ChoiSpace(TensorSpace::qubits(2), TensorSpace::qubits(3)); }

inline Certificate unlock_trial(double x) {
    Certificate cert;
    cert.name = "unlock-trial(" + std::to_string(x) + ")";
    Mat p = projector(phi_plus(2)), g = projector(ghz(3));
    cert.spec = {unlock_space(), p, g, Mode::None, {"A", "B"}};
    cert.omega = trial_omega(p, g, x);
    cert.claimed_value = x;
    cert.problem_tag = "phi2->ghz3 relaxed {A,B}, no trace condition";
    return cert;
}

inline Certificate unlock_opt() {
    Certificate cert;
    cert.name = "unlock-opt";
    Mat p = projector(phi_plus(2)), g = projector(ghz(3));
    Mat q = Mat::Identity(4, 4) - p;
    Mat r = Mat::Identity(8, 8) - g - projector(ket_bits("001")) - projector(ket_bits("110"));
    cert.spec = {unlock_space(), p, g, Mode::TNP, {"A", "B"}};
    cert.omega = 0.6 * kron(p, g) + 0.2 * kron(q, r);
    cert.claimed_value = 0.6;
    cert.problem_tag = "phi2->ghz3 tnp relaxed {A,B}";
    return cert;
}

inline Certificate unlock_multi(int n, int np) {
    if (n < 2 || np < 2 || n > 5 || np > 5 || n + np > 8)
        throw std::invalid_argument("unlock-multi needs 2 <= N, N' <= 5 and N + N' <= 8");
    Certificate cert;
    cert.name = "unlock-multi(" + std::to_string(n) + "," + std::to_string(np) + ")";
    Mat gi = projector(ghz(n)), go = projector(ghz(np));
    std::vector<std::string> pp;
    for (int i = 0; i < std::min(n, np); ++i) pp.push_back(std::string(1, char('A' + i)));
    cert.spec = {ChoiSpace(TensorSpace::qubits(n), TensorSpace::qubits(np)), gi, go, Mode::None, pp};
    cert.omega = trial_omega(gi, go, 3.0);
    cert.claimed_value = 3.0;
    cert.problem_tag = "ghz" + std::to_string(n) + "->ghz" + std::to_string(np) + " relaxed, no trace condition";
    return cert;
}

inline Certificate werner_certificate(int d, int dp) {
    if (d < 2 || dp < 2) throw std::invalid_argument("werner-distill needs d, d' >= 2");
    const double D = d, P = dp;
    Mat ps = proj_sym(d), pa = proj_antisym(d), pp = projector(phi_plus(dp));
    Mat qp = (Mat::Identity(dp * dp, dp * dp) - pp) / (P * P - 1);
    Certificate cert;
    if (dp >= d) {
        const double s = 2.0 / (D * P + P - 2 * D);
        cert.omega = s * (kron(pa, pp) + (P - 1) * kron(ps, qp));
        cert.claimed_value = s;
    } else {
        const double s = 2.0 / (D * (P - 1));
        cert.omega = s * kron(Mat(pa + (D - P) / ((D + 1) * P) * ps), pp) +
                     2.0 * (P + 1) / ((D + 1) * P) * kron(ps, qp);
        cert.claimed_value = s;
    }
    cert.name = "werner-distill(" + std::to_string(d) + "," + std::to_string(dp) + ")";
    cert.spec = {bipartite_space(d, dp), werner_antisym(d), pp, Mode::TP, {"A"}};
    cert.problem_tag = "werner" + std::to_string(d) + "->phi" + std::to_string(dp) + " tp {A}";
    return cert;
}

// ---- name dispatch ----

struct CertificateName {
    std::string base;
    std::vector<double> args;
};

inline CertificateName parse_certificate_name(const std::string& s) {
    CertificateName n;
    auto open = s.find('(');
    if (open == std::string::npos) {
        n.base = s;
        return n;
    }
    if (s.back() != ')') throw std::invalid_argument("malformed certificate name '" + s + "'");
    n.base = s.substr(0, open);
    std::string inner = s.substr(open + 1, s.size() - open - 2);
    std::stringstream ss(inner);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        auto eq = tok.find('=');
        if (eq != std::string::npos) tok = tok.substr(eq + 1);
        try {
            size_t used = 0;
            n.args.push_back(std::stod(tok, &used));
            while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
            if (used != tok.size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw std::invalid_argument("bad certificate parameter '" + tok + "' in '" + s + "'");
        }
    }
    return n;
}

inline const std::vector<std::string>& certificate_names() {
    static const std::vector<std::string> names{
        "ghz-w-tp", "ghz-w-tp-dual", "ghz-w-tp-dual-printed", "ghz-w-tp-corrupt", "ghz-w-tnp", "ghz-w-tnp-dual",
        "w-ghz-tnp", "w-ghz-tnp-dual(delta)", "bipartite-tp(d,d')", "bipartite-tnp(d,d')", "unlock-trial(x)",
        "unlock-opt", "unlock-multi(N,N')", "werner-distill(d,d')"};
    return names;
}

inline Certificate build_certificate(const std::string& spec) {
    CertificateName n = parse_certificate_name(spec);
    auto want = [&](size_t k) {
        if (n.args.size() != k)
            throw std::invalid_argument("certificate '" + n.base + "' takes " + std::to_string(k) + " parameter(s)");
    };
    auto as_int = [&](double v) {
        if (v != std::floor(v)) throw std::invalid_argument("integer parameter expected in '" + spec + "'");
        return static_cast<int>(v);
    };
    if (n.base == "ghz-w-tp") { want(0); return ghz_w_tp_primal(); }
    if (n.base == "ghz-w-tp-corrupt") { want(0); return ghz_w_tp_primal(true); }
    if (n.base == "ghz-w-tp-dual") { want(0); return ghz_w_tp_dual(); }
    if (n.base == "ghz-w-tp-dual-printed") { want(0); return ghz_w_tp_dual_printed(); }
    if (n.base == "ghz-w-tnp") { want(0); return ghz_w_tnp_primal(); }
    if (n.base == "ghz-w-tnp-dual") { want(0); return ghz_w_tnp_dual(); }
    if (n.base == "w-ghz-tnp") { want(0); return w_ghz_tnp_primal(); }
    if (n.base == "w-ghz-tnp-dual") {
        if (n.args.empty()) n.args.push_back(1e-3);
        want(1);
        auto c = w_ghz_tnp_dual(n.args[0]);
        return c;
    }
    if (n.base == "bipartite-tp") { want(2); return bipartite_certificate(as_int(n.args[0]), as_int(n.args[1]), Mode::TP); }
    if (n.base == "bipartite-tnp") { want(2); return bipartite_certificate(as_int(n.args[0]), as_int(n.args[1]), Mode::TNP); }
    if (n.base == "unlock-trial") { want(1); return unlock_trial(n.args[0]); }
    if (n.base == "unlock-opt") { want(0); return unlock_opt(); }
    if (n.base == "unlock-multi") { want(2); return unlock_multi(as_int(n.args[0]), as_int(n.args[1])); }
    if (n.base == "werner-distill") { want(2); return werner_certificate(as_int(n.args[0]), as_int(n.args[1])); }
    throw std::invalid_argument("unknown certificate '" + n.base + "'");
}

// ---- verification ----

inline VerificationReport verify_primal(const Certificate& cert, const ToleranceConfig& tol = {}) {
    if (!cert.omega) throw std::invalid_argument("certificate '" + cert.name + "' has no primal part");
    VerificationReport r;
    r.certificate = cert.name;
    r.part = "primal";
    const Mat* wv = cert.omega_v ? &*cert.omega_v : nullptr;
    auto pc = check_primal(cert.spec, *cert.omega, wv, tol);
    r.margins = pc.margins;
    r.objective = pc.objective;
    r.claimed = cert.claimed_value;
    r.gap = r.objective - r.claimed;
    r.value_tol = 1e-9;
    r.pass = pc.pass && std::abs(r.gap) <= r.value_tol;
    r.notes = cert.notes;
    return r;
}

// Left-hand side of the dual feasibility inequality (must be <= 0), T-form.
inline Mat dual_constraint_operator(const ConversionSpec& s, const DualData& d, double nu) {
    const auto& cs = s.space;
    const int din = cs.din(), dout = cs.dout();
    Mat Iv = Mat::Identity(din, din), Io = Mat::Identity(dout, dout);
    Mat rt = s.rho.transpose();
    Mat v = rt;
    if (d.lambda_p.size()) v -= d.lambda_p.transpose();
    if (d.lambda_e.size()) v -= d.lambda_e.transpose();
    Mat L = kron(v, Io) - nu * kron(rt, Mat(Io - s.sigma));
    for (const auto& [p, l] : d.lambda) L += cs.party_pt(l, p);
    return (L + L.adjoint()) / 2.0;
}

inline Mat dual_omega_operator(const ConversionSpec& s, const DualData& d) {
    const auto& cs = s.space;
    const int din = cs.din();
    Mat L = Mat::Zero(din, din);
    if (d.lambda_e.size()) L -= d.lambda_e.transpose();
    if (d.lambda_ep.size()) L -= d.lambda_ep.transpose();
    for (const auto& [p, m] : d.mu) L += partial_transpose(m, cs.input().dims(), cs.input_party_factors(p));
    return (L + L.adjoint()) / 2.0;
}

inline double dual_value(const DualData& d) {
    double v = 0.0;
    for (const Mat* m : {&d.lambda_p, &d.lambda_e, &d.lambda_ep})
        if (m->size()) v += m->trace().real();
    return v;
}

struct NuSearch {
    bool found = false;
    double nu = 0.0;
    double max_eig = 0.0;
    int evaluations = 0;
};

// Smallest nu (to relative 1e-6) above the floor with the dual operator <= 0: doubling, then bisection.
// Feasibility uses the same allowance as the PSD margins, so numerical zeros count as zero.
inline NuSearch search_nu(const ConversionSpec& s, const DualData& d, const ToleranceConfig& tol = {}) {
    NuSearch r;
    double allowance = 0.0;
    auto worst = [&](double nu) {
        ++r.evaluations;
        Mat L = dual_constraint_operator(s, d, nu);
        allowance = tol.psd_abs + tol.psd_rel * spectral_norm(L);
        return max_eig(L);
    };
    double lo = d.nu_floor, step = 1.0, hi = 0.0;
    bool ok = false;
    for (int k = 0; k < 40; ++k) {
        hi = d.nu_floor + step;
        if (double w = worst(hi); w <= allowance) { ok = true; break; }
        lo = hi;
        step *= 2.0;
    }
    if (!ok) return r;
    while (hi - lo > 1e-6 * hi) {
        double mid = 0.5 * (lo + hi);
        double w = worst(mid);
        (w <= allowance ? hi : lo) = mid;
    }
    r.found = true;
    r.nu = hi;
    r.max_eig = worst(hi);
    return r;
}

inline VerificationReport verify_dual(const Certificate& cert, const ToleranceConfig& tol = {}) {
    if (!cert.dual) throw std::invalid_argument("certificate '" + cert.name + "' has no dual part");
    const DualData& d = *cert.dual;
    const auto& s = cert.spec;
    VerificationReport r;
    r.certificate = cert.name;
    r.part = "dual";
    r.notes = cert.notes;
    if (d.lambda_p.size()) r.margins.push_back(psd_margin("lambda_p", d.lambda_p, tol));
    if (d.lambda_ep.size()) r.margins.push_back(psd_margin("lambda_ep", d.lambda_ep, tol));
    if (d.lambda_e.size())
        r.margins.push_back(eq_margin("lambda_e hermiticity", max_abs(d.lambda_e - d.lambda_e.adjoint()), tol));
    for (const auto& [p, l] : d.lambda) r.margins.push_back(psd_margin("lambda_" + p, l, tol));
    for (const auto& [p, m] : d.mu) r.margins.push_back(psd_margin("mu_" + p, m, tol));
    double nu = d.nu;
    if (d.search_nu) {
        auto ns = search_nu(s, d, tol);
        if (!ns.found) {
            r.notes.push_back("nu search failed: no feasible nu found above " + std::to_string(d.nu_floor));
            r.margins.push_back({"nu-search", "psd", -1.0, 0.0, false});
        }
        nu = ns.found ? ns.nu : d.nu_floor;
        r.nu = nu;
    } else {
        r.nu = nu;
    }
    r.margins.push_back(psd_margin("dual constraint (-LHS)", Mat(-dual_constraint_operator(s, d, nu)), tol));
    if (d.mode == Mode::TP)
        r.margins.push_back(psd_margin("dual omega constraint (-LHS)", Mat(-dual_omega_operator(s, d)), tol));
    r.objective = dual_value(d);
    r.claimed = cert.claimed_value;
    r.gap = r.objective - r.claimed;
    r.value_tol = 1e-8;
    r.pass = std::abs(r.gap) <= r.value_tol;
    for (const auto& m : r.margins) r.pass = r.pass && m.pass;
    return r;
}

// ---- W -> GHZ dual spectrum ----

struct SpectrumReport {
    double lambda = 0.0, nu = 0.0;
    std::vector<std::pair<std::string, double>> analytic;  // mu_1 ... mu_-
    std::vector<int> multiplicity;                          // numeric eigenvalues matching each analytic value
    RVec numeric;
    double max_mismatch = 0.0;  // largest distance of a numeric eigenvalue to {0} U analytic values
    bool match = false;
    bool all_nonpositive = false;
};

inline SpectrumReport w_ghz_dual_spectrum(double lambda, double nu) {
    SpectrumReport r;
    r.lambda = lambda;
    r.nu = nu;
    const double l = lambda;
    const double disc = 1569 - 2220 * nu + 3330 * l + (45 * l - 30 * nu) * (45 * l - 30 * nu);
    const double sq = std::sqrt(std::max(0.0, disc));
    r.analytic = {{"mu1", 2 - nu},
                  {"mu2", (13 - 135 * l) / 90},
                  {"mu3", (-2 - 45 * l) / 30},
                  {"mu4", (4 - 45 * l) / 30},
                  {"mu+", (47 - 30 * nu - 45 * l + sq) / 60},
                  {"mu-", (47 - 30 * nu - 45 * l - sq) / 60}};
    auto [la, lp] = w_ghz_dual_matrices(lambda);
    DualData d;
    d.mode = Mode::TNP;
    d.lambda_p = lp;
    d.lambda = detail::cyclic_lambdas(la);
    auto s = detail::ghz_w_spec(false, Mode::TNP);
    r.numeric = eigenvalues(dual_constraint_operator(s, d, nu));
    const double tol = 1e-8;
    r.multiplicity.assign(r.analytic.size(), 0);
    for (Eigen::Index i = 0; i < r.numeric.size(); ++i) {
        double ev = r.numeric(i), best = std::abs(ev);
        for (size_t k = 0; k < r.analytic.size(); ++k) {
            double dk = std::abs(ev - r.analytic[k].second);
            best = std::min(best, dk);
            if (dk <= tol) ++r.multiplicity[k];
        }
        r.max_mismatch = std::max(r.max_mismatch, best);
    }
    r.match = r.max_mismatch <= tol && disc >= 0;
    for (int m : r.multiplicity) r.match = r.match && m > 0;
    r.all_nonpositive = true;
    for (const auto& a : r.analytic) r.all_nonpositive = r.all_nonpositive && a.second <= 0;
    return r;
}

}  // namespace pptforge
