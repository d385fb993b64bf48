#pragma once

#include "certificates.hpp"

#include <json.hpp>

#include <iomanip>
#include <sstream>

namespace pptforge {

using json = nlohmann::ordered_json;

// ---- matrices ----

inline json matrix_to_json(const Mat& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("matrix_to_json: square matrix expected");
    json e = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) e.push_back({m(i, j).real(), m(i, j).imag()});
    return {{"dim", m.rows()}, {"entries", std::move(e)}};
}

inline Mat matrix_from_json(const json& j) {
    if (!j.is_object() || !j.contains("dim") || !j.contains("entries"))
        throw std::invalid_argument("matrix JSON needs \"dim\" and \"entries\"");
    const auto dim = j.at("dim").get<long long>();
    if (dim < 1) throw std::invalid_argument("matrix JSON: dim must be >= 1");
    const auto& e = j.at("entries");
    if (!e.is_array() || static_cast<long long>(e.size()) != dim * dim)
        throw std::invalid_argument("matrix JSON: expected " + std::to_string(dim * dim) + " entries");
    Mat m(dim, dim);
    for (long long k = 0; k < dim * dim; ++k) {
        const auto& z = e[k];
        if (!z.is_array() || z.size() != 2) throw std::invalid_argument("matrix JSON: entries are [re, im] pairs");
        double re = z[0].get<double>(), im = z[1].get<double>();
        if (!std::isfinite(re) || !std::isfinite(im)) throw std::invalid_argument("matrix JSON: non-finite entry");
        m(k / dim, k % dim) = cplx(re, im);
    }
    return m;
}

inline json factors_to_json(const TensorSpace& s) {
    json f = json::array();
    for (const auto& x : s.factors()) f.push_back({x.label, x.dim});
    return f;
}

inline TensorSpace factors_from_json(const json& j) {
    std::vector<Factor> f;
    for (const auto& x : j) f.push_back({x.at(0).get<std::string>(), x.at(1).get<int>()});
    return TensorSpace(f);
}

inline json state_to_json(const TensorSpace& s, const Mat& rho) {
    json j = matrix_to_json(rho);
    j["factors"] = factors_to_json(s);
    return j;
}

inline json choi_to_json(const ChoiSpace& cs, const Mat& omega) {
    json j = matrix_to_json(omega);
    j["factors"] = factors_to_json(cs.input());
    j["output_factors"] = factors_to_json(cs.output());
    return j;
}

inline ChoiOperator choi_from_json(const json& j) {
    ChoiSpace cs(factors_from_json(j.at("factors")), factors_from_json(j.at("output_factors")));
    Mat m = matrix_from_json(j);
    if (m.rows() != cs.dim()) throw std::invalid_argument("Choi JSON: dim does not match the factors");
    return {HermitianOperator(m), cs};
}

// ---- problems ----

namespace detail {

inline json vec_json(const RVec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::isfinite(v(i))) a.push_back(v(i));
        else a.push_back(nullptr);  // +-inf bound
    }
    return a;
}

inline RVec vec_from(const json& a, double null_value) {
    RVec v(a.size());
    for (size_t i = 0; i < a.size(); ++i) v(i) = a[i].is_null() ? null_value : a[i].get<double>();
    return v;
}

inline json rmat_json(const RMat& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec_json(m.row(i).transpose()));
    return a;
}

inline RMat rmat_from(const json& a, int cols) {
    RMat m(a.size(), cols);
    for (size_t i = 0; i < a.size(); ++i) {
        if (static_cast<int>(a[i].size()) != cols) throw std::invalid_argument("problem JSON: row length mismatch");
        m.row(i) = vec_from(a[i], 0.0).transpose();
    }
    return m;
}

}  // namespace detail

inline json sdp_to_json(const SdpProblem& p) {
    json blocks = json::array();
    for (const auto& b : p.blocks) {
        json f = json::array();
        for (const auto& m : b.F) f.push_back(matrix_to_json(m));
        blocks.push_back({{"name", b.name}, {"F0", matrix_to_json(b.F0)}, {"F", std::move(f)}});
    }
    return {{"schema", 1},
            {"kind", "sdp"},
            {"sense", "maximize"},
            {"variables", p.var_names},
            {"objective", {{"c", detail::vec_json(p.c)}, {"c0", p.c0}}},
            {"equalities", {{"E", detail::rmat_json(p.E)}, {"f", detail::vec_json(p.f)}}},
            {"blocks", std::move(blocks)}};
}

inline SdpProblem sdp_from_json(const json& j) {
    if (j.value("kind", "") != "sdp") throw std::invalid_argument("problem JSON: kind \"sdp\" expected");
    RVec c = detail::vec_from(j.at("objective").at("c"), 0.0);
    const int n = static_cast<int>(c.size());
    SdpProblem p(n);
    p.c = c;
    p.c0 = j.at("objective").value("c0", 0.0);
    if (j.contains("variables")) p.var_names = j.at("variables").get<std::vector<std::string>>();
    if (j.contains("equalities")) {
        p.E = detail::rmat_from(j.at("equalities").at("E"), n);
        p.f = detail::vec_from(j.at("equalities").at("f"), 0.0);
        if (p.f.size() != p.E.rows()) throw std::invalid_argument("problem JSON: E and f sizes differ");
    }
    for (const auto& b : j.at("blocks")) {
        auto& blk = p.add_block(b.at("name").get<std::string>(), matrix_from_json(b.at("F0")));
        const auto& f = b.at("F");
        if (static_cast<int>(f.size()) != n) throw std::invalid_argument("problem JSON: one F per variable expected");
        for (int k = 0; k < n; ++k) {
            blk.F[k] = matrix_from_json(f[k]);
            if (blk.F[k].rows() != blk.F0.rows()) throw std::invalid_argument("problem JSON: block size mismatch");
        }
    }
    return p;
}

inline json lp_to_json(const LpProblem& p) {
    return {{"schema", 1},
            {"kind", "lp"},
            {"sense", "maximize"},
            {"variables", p.var_names},
            {"objective", {{"c", detail::vec_json(p.c)}}},
            {"inequalities", {{"A", detail::rmat_json(p.A)}, {"b", detail::vec_json(p.b)}, {"names", p.row_names}}},
            {"equalities", {{"E", detail::rmat_json(p.E)}, {"f", detail::vec_json(p.f)}}},
            {"bounds", {{"lb", detail::vec_json(p.lb)}, {"ub", detail::vec_json(p.ub)}}}};
}

inline LpProblem lp_from_json(const json& j) {
    if (j.value("kind", "") != "lp") throw std::invalid_argument("problem JSON: kind \"lp\" expected");
    const double inf = std::numeric_limits<double>::infinity();
    RVec c = detail::vec_from(j.at("objective").at("c"), 0.0);
    const int n = static_cast<int>(c.size());
    LpProblem p(n);
    p.c = c;
    if (j.contains("variables")) p.var_names = j.at("variables").get<std::vector<std::string>>();
    p.A = detail::rmat_from(j.at("inequalities").at("A"), n);
    p.b = detail::vec_from(j.at("inequalities").at("b"), 0.0);
    p.row_names = j.at("inequalities").value("names", std::vector<std::string>(p.b.size()));
    p.E = detail::rmat_from(j.at("equalities").at("E"), n);
    p.f = detail::vec_from(j.at("equalities").at("f"), 0.0);
    p.lb = detail::vec_from(j.at("bounds").at("lb"), -inf);
    p.ub = detail::vec_from(j.at("bounds").at("ub"), inf);
    return p;
}

// ---- reports and certificates ----

inline json margin_to_json(const Margin& m) {
    return {{"name", m.name}, {"kind", m.kind}, {"value", m.value}, {"bound", m.bound}, {"pass", m.pass}};
}

inline json margins_to_json(const std::vector<Margin>& ms) {
    json a = json::array();
    for (const auto& m : ms) a.push_back(margin_to_json(m));
    return a;
}

inline json tolerances_to_json(const ToleranceConfig& t) {
    return {{"psd_abs", t.psd_abs}, {"psd_rel", t.psd_rel}, {"eq_tol", t.eq_tol}, {"gap_tol", t.gap_tol}};
}

inline std::string margin_table(const std::vector<Margin>& ms) {
    size_t w = 10;
    for (const auto& m : ms) w = std::max(w, m.name.size());
    std::ostringstream os;
    os << std::left << std::setw(int(w)) << "constraint" << "  kind  " << std::right << std::setw(24) << "margin"
       << std::setw(24) << "bound" << "  status\n";
    for (const auto& m : ms) {
        os << std::left << std::setw(int(w)) << m.name << "  " << std::setw(4) << m.kind << "  " << std::right
           << std::setw(24) << std::setprecision(17) << m.value << std::setw(24) << m.bound << "  "
           << (m.pass ? "ok" : "FAIL") << "\n";
    }
    return os.str();
}

inline json dual_to_json(const DualData& d) {
    json j;
    j["mode"] = to_string(d.mode);
    for (auto [name, m] : {std::pair{"lambda_p", &d.lambda_p}, {"lambda_e", &d.lambda_e}, {"lambda_ep", &d.lambda_ep}})
        if (m->size()) j[name] = matrix_to_json(*m);
    for (const auto& [p, m] : d.lambda) j["lambda_" + p] = matrix_to_json(m);
    for (const auto& [p, m] : d.mu) j["mu_" + p] = matrix_to_json(m);
    if (d.search_nu) j["nu_search_floor"] = d.nu_floor;
    else j["nu"] = d.nu;
    return j;
}

inline json certificate_to_json(const Certificate& c) {
    json j;
    j["name"] = c.name;
    j["problem_tag"] = c.problem_tag;
    j["mode"] = to_string(c.spec.mode);
    j["ppt_parties"] = effective_ppt_parties(c.spec);
    j["claimed_value"] = c.claimed_value;
    j["rho"] = state_to_json(c.spec.space.input(), c.spec.rho);
    j["sigma"] = state_to_json(c.spec.space.output(), c.spec.sigma);
    if (c.omega) j["omega"] = choi_to_json(c.spec.space, *c.omega);
    if (c.omega_v) j["omega_v"] = state_to_json(c.spec.space.input(), *c.omega_v);
    if (c.dual) j["dual"] = dual_to_json(*c.dual);
    j["notes"] = c.notes;
    return j;
}

inline json report_to_json(const VerificationReport& r) {
    json j{{"certificate", r.certificate},
           {"part", r.part},
           {"pass", r.pass},
           {"objective", r.objective},
           {"claimed", r.claimed},
           {"gap", r.gap},
           {"value_tol", r.value_tol}};
    if (r.nu) j["nu"] = *r.nu;
    j["margins"] = margins_to_json(r.margins);
    j["notes"] = r.notes;
    return j;
}

}  // namespace pptforge
