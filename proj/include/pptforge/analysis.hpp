#pragma once

#include "certificates.hpp"
#include "rng.hpp"

#include <random>

namespace pptforge {

// ---- closed forms ----

inline double mes_tp(int d, int dp) {
    if (d < 2 || dp < 2) throw std::invalid_argument("mes_tp needs d, d' >= 2");
    if (dp < d) throw std::invalid_argument("mes_tp formula holds for d' >= d");
    return double(d) * (d - 1) / (double(d) * dp + dp - 2.0 * d);
}

inline double mes_tnp(int d, int dp) {
    if (d < 2 || dp < 2) throw std::invalid_argument("mes_tnp needs d, d' >= 2");
    return double(d - 1) / double(dp - 1);
}

// antisymmetric Werner state -> P+_{d'}
inline double aws(int d, int dp) {
    if (d < 2 || dp < 2) throw std::invalid_argument("aws needs d, d' >= 2");
    if (dp > d) return 2.0 / (double(d) * dp + dp - 2.0 * d);
    return 2.0 / (double(d) * (dp - 1));
}

inline double negativity_ratio(int d, int dp) {
    auto n = [](int k) {
        return negativity(projector(phi_plus(k)), {k, k}, {0});
    };
    return n(d) / n(dp);
}

struct ClosedFormInfo {
    std::string name;
    int arity;
    std::string formula;
};

inline const std::vector<ClosedFormInfo>& closed_form_names() {
    static const std::vector<ClosedFormInfo> v{
        {"mes_tp", 2, "d(d-1)/(d d' + d' - 2d), d' >= d"},
        {"mes_tnp", 2, "(d-1)/(d'-1)"},
        {"negativity_ratio", 2, "N(P+_d)/N(P+_d') evaluated numerically"},
        {"aws", 2, "2/(d d' + d' - 2d) for d' > d; 2/(d(d'-1)) for d' <= d"},
        {"ghz_w_tp", 0, "6 b2"},
        {"ghz_w_tnp", 0, "4/5"},
        {"w_ghz_tnp", 0, "1/3"},
        {"unlock_opt", 0, "3/5"},
        {"x0_unlock", 0, "3"}};
    return v;
}

inline double closed_form(const std::string& name, const std::vector<double>& params) {
    const ClosedFormInfo* info = nullptr;
    for (const auto& c : closed_form_names())
        if (c.name == name) info = &c;
    if (!info) throw std::invalid_argument("unknown closed form '" + name + "'");
    if (static_cast<int>(params.size()) != info->arity)
        throw std::invalid_argument("closed form '" + name + "' takes " + std::to_string(info->arity) + " parameter(s)");
    std::vector<int> ip;
    for (double p : params) {
        if (p != std::floor(p)) throw std::invalid_argument("closed form '" + name + "' takes integer parameters");
        ip.push_back(static_cast<int>(p));
    }
    if (name == "mes_tp") return mes_tp(ip[0], ip[1]);
    if (name == "mes_tnp") return mes_tnp(ip[0], ip[1]);
    if (name == "negativity_ratio") {
        if (ip[0] < 2 || ip[1] < 2) throw std::invalid_argument("negativity_ratio needs d, d' >= 2");
        return negativity_ratio(ip[0], ip[1]);
    }
    if (name == "aws") return aws(ip[0], ip[1]);
    if (name == "ghz_w_tp") return constant("p_ghz_w_tp");
    if (name == "ghz_w_tnp") return 0.8;
    if (name == "w_ghz_tnp") return 1.0 / 3.0;
    if (name == "unlock_opt") return 0.6;
    return constant("x0_unlock");
}

// ---- pure states with party labels ----

struct PureState {
    TensorSpace space;
    Vec amplitudes;

    Mat rho() const { return projector(amplitudes); }
};

// Expression "term*term*..." with term = name[:labels]; name is ghz<N>, w3, phi<d> or ket<bits>.
// Labels default to consecutive letters after those already used, e.g. "phi2:AB*ket0:C".
inline PureState parse_pure_state(const std::string& expr) {
    std::vector<Factor> factors;
    Vec amp = Vec::Ones(1);
    std::set<std::string> used;
    if (expr.empty() || expr.back() == '*') throw std::invalid_argument("empty factor in state '" + expr + "'");
    std::stringstream ss(expr);
    std::string term;
    while (std::getline(ss, term, '*')) {
        if (term.empty()) throw std::invalid_argument("empty factor in state '" + expr + "'");
        std::string name = term, labels;
        if (auto c = term.find(':'); c != std::string::npos) {
            name = term.substr(0, c);
            labels = term.substr(c + 1);
        }
        Vec v;
        std::vector<int> dims;
        if (name.rfind("ket", 0) == 0) {
            std::string bits = name.substr(3);
            if (bits.empty() || bits.find_first_not_of("01") != std::string::npos)
                throw std::invalid_argument("ket<bits> needs a 0/1 string in '" + term + "'");
            v = ket_bits(bits);
            dims.assign(bits.size(), 2);
        } else {
            NamedState s = named_state(name);
            if (!s.pure) throw std::invalid_argument("state '" + name + "' is not pure");
            dims = s.space.dims();
            if (name == "w3") v = w3();
            else if (name.rfind("ghz", 0) == 0) v = ghz(static_cast<int>(dims.size()));
            else v = phi_plus(dims[0]);
        }
        if (labels.empty()) {
            char next = 'A';
            for (size_t i = 0; i < dims.size(); ++i) {
                while (used.count(std::string(1, next))) ++next;
                labels += next++;
            }
        }
        if (labels.size() != dims.size())
            throw std::invalid_argument("factor '" + term + "' needs " + std::to_string(dims.size()) + " labels");
        for (size_t i = 0; i < dims.size(); ++i) {
            std::string l(1, labels[i]);
            if (!used.insert(l).second) throw std::invalid_argument("duplicate party label " + l + " in '" + expr + "'");
            factors.push_back({l, dims[i]});
        }
        amp = kron(Mat(amp), Mat(v)).col(0);
    }
    if (factors.empty()) throw std::invalid_argument("empty state expression");
    return {TensorSpace(factors), amp};
}

// ---- x0 of the trial form ----

struct X0Result {
    double x0 = 0.0;
    int evaluations = 0;
};

inline X0Result compute_x0(const PureState& psi, const PureState& phi, const std::vector<std::string>& ppt_parties) {
    ChoiSpace cs(psi.space, phi.space);
    for (const auto& p : ppt_parties) {
        cs.party_factors(p);
        auto cut_npt = [&](const PureState& s, const char* which) {
            auto f = s.space.find(p);
            if (!f) return false;
            (void)which;
            return min_eig(partial_transpose(s.rho(), s.space.dims(), {*f})) < -1e-9;
        };
        if (!cut_npt(psi, "input"))
            throw std::invalid_argument("genuineness precondition violated: input state is PPT across the party " + p + " cut");
        if (!cut_npt(phi, "target"))
            throw std::invalid_argument("genuineness precondition violated: target state is PPT across the party " + p + " cut");
    }
    Mat ps = psi.rho(), ph = phi.rho();
    X0Result r;
    auto feasible = [&](double x) {
        ++r.evaluations;
        Mat t = cs.gamma_v(trial_omega(ps, ph, x));
        const double scale = 1e-12 * std::max(1.0, x);
        if (min_eig(t) < -scale) return false;
        for (const auto& p : ppt_parties)
            if (min_eig(cs.party_pt(t, p)) < -scale) return false;
        return true;
    };
    if (!feasible(0.0)) throw std::runtime_error("trial form infeasible at x = 0");
    double lo = 0.0, hi = 1.0;
    while (feasible(hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) throw std::runtime_error("trial form feasible for unbounded x");
    }
    while (hi - lo > 1e-12 * std::max(1.0, hi)) {
        double mid = 0.5 * (lo + hi);
        (feasible(mid) ? lo : hi) = mid;
    }
    r.x0 = lo;
    return r;
}

// ---- convertibility ----

struct Convertibility {
    bool possible = true;
    std::string reason;
    std::vector<std::string> source_npt, target_npt;  // single-party cuts that are NPT
};

namespace detail {

inline bool npt_across(const PureState& s, const std::vector<std::string>& cut) {
    std::vector<int> f;
    for (const auto& l : cut)
        if (auto i = s.space.find(l)) f.push_back(*i);
    if (f.empty() || static_cast<int>(f.size()) == s.space.size()) return false;
    return min_eig(partial_transpose(s.rho(), s.space.dims(), f)) < -1e-9;
}

}  // namespace detail

inline Convertibility decide_convertibility(const PureState& psi, const PureState& phi) {
    Convertibility c;
    for (const auto& l : psi.space.labels())
        if (detail::npt_across(psi, {l})) c.source_npt.push_back(l);
    for (const auto& l : phi.space.labels())
        if (detail::npt_across(phi, {l})) c.target_npt.push_back(l);
    auto has = [](const std::vector<std::string>& v, const std::string& x) {
        return std::find(v.begin(), v.end(), x) != v.end();
    };
    for (const auto& p : c.target_npt) {
        if (has(c.source_npt, p)) continue;
        c.possible = false;
        if (psi.space.find(p))
            c.reason = "not PPT-preserving w.r.t. " + p + ": source is PPT across the " + p + " cut, target is not";
        else
            c.reason = "subset rule: party " + p + " is entangled in the target but absent from the source";
        return c;
    }
    std::vector<std::string> all = psi.space.labels();
    for (const auto& l : phi.space.labels())
        if (!has(all, l)) all.push_back(l);
    const int n = static_cast<int>(all.size());
    if (n <= 16) {
        for (int mask = 1; mask < (1 << n) - 1; ++mask) {
            std::vector<std::string> cut;
            for (int i = 0; i < n; ++i)
                if (mask >> i & 1) cut.push_back(all[i]);
            if (cut.size() < 2) continue;
            if (detail::npt_across(phi, cut) && !detail::npt_across(psi, cut)) {
                std::string s;
                for (const auto& x : cut) s += x;
                c.possible = false;
                c.reason = "not PPT-preserving w.r.t. the cut " + s + ": source is PPT across it, target is not";
                return c;
            }
        }
    }
    c.reason = "every cut that is NPT in the target is NPT in the source";
    return c;
}

// ---- high-rank no-go experiment ----

struct HighrankSample {
    int index = 0;
    int attempt = 0;
    double pt_min_eig = 0.0;
    double optimum = 0.0;
    std::string status;
};

struct HighrankResult {
    int d = 2, dp = 2, rank = 0;
    std::uint64_t seed = 0;
    std::vector<HighrankSample> samples;
    int attempts = 0;
    double max_optimum = 0.0;
    double threshold = 1e-6;
    bool all_below = true;
    double control = 0.0;  // optimum for P+_d itself
};

inline std::vector<Mat> output_isotropic_basis(int d, int dp) {
    Mat pp = projector(phi_plus(dp));
    Mat qp = Mat::Identity(dp * dp, dp * dp) - pp;
    std::vector<Mat> basis;
    for (const auto& h : full_hermitian_basis(d * d)) {
        basis.push_back(kron(h, pp));
        basis.push_back(kron(h, qp));
    }
    return basis;
}

inline double distill_optimum(const Mat& rho, int d, int dp, SolveStatus* status = nullptr) {
    ConversionSpec spec{bipartite_space(d, dp), rho, projector(phi_plus(dp)), Mode::TNP, {"A"}};
    auto cp = build_conversion_problem(spec, output_isotropic_basis(d, dp));
    SdpOptions opt;
    opt.tol = 1e-10;
    auto rep = solve_sdp(cp.sdp, opt);
    if (status) *status = rep.status;
    return rep.objective;
}

inline Mat random_mixed_state(int n, int rank, CounterRng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Mat G(n, rank);
    for (int j = 0; j < rank; ++j)
        for (int i = 0; i < n; ++i) {
            double re = g(rng);
            double im = g(rng);
            G(i, j) = cplx(re, im);
        }
    Mat r = G * G.adjoint();
    return r / r.trace().real();
}

inline HighrankResult highrank_nogo_experiment(int d, int dp, int rank, int samples, std::uint64_t seed,
                                               int max_attempts_per_sample = 50) {
    if (d < 2 || dp < 2) throw std::invalid_argument("experiment needs d, d' >= 2");
    if (rank < 1 || rank > d * d) throw std::invalid_argument("rank must lie in [1, d^2]");
    if (samples < 1) throw std::invalid_argument("samples must be >= 1");
    HighrankResult r;
    r.d = d;
    r.dp = dp;
    r.rank = rank;
    r.seed = seed;
    const int cap = samples * max_attempts_per_sample;
    for (int attempt = 0; static_cast<int>(r.samples.size()) < samples; ++attempt) {
        if (attempt >= cap)
            throw std::runtime_error("only " + std::to_string(r.samples.size()) + " NPT samples after " +
                                     std::to_string(cap) + " draws; try a different --seed");
        CounterRng rng(seed, static_cast<std::uint64_t>(attempt));
        Mat rho = random_mixed_state(d * d, rank, rng);
        double pt = min_eig(partial_transpose(rho, {d, d}, {0}));
        r.attempts = attempt + 1;
        if (pt >= -1e-3) continue;
        HighrankSample s;
        s.index = static_cast<int>(r.samples.size());
        s.attempt = attempt;
        s.pt_min_eig = pt;
        SolveStatus st;
        s.optimum = distill_optimum(rho, d, dp, &st);
        s.status = to_string(st);
        r.max_optimum = std::max(r.max_optimum, s.optimum);
        r.samples.push_back(s);
    }
    r.all_below = r.max_optimum <= r.threshold;
    r.control = distill_optimum(projector(phi_plus(d)), d, dp);
    return r;
}

}  // namespace pptforge
