#include <pptforge/analysis.hpp>
#include <pptforge/json_io.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>

using namespace pptforge;

namespace {

struct Globals {
    bool table = false;
    bool no_timing = false;
    std::uint64_t seed = 0;
};

struct Output {
    json doc;
    int code = 0;
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> r;
    std::stringstream ss(s);
    std::string t;
    while (std::getline(ss, t, ',')) {
        if (t.empty()) throw std::invalid_argument("empty item in list '" + s + "'");
        r.push_back(t);
    }
    return r;
}

json envelope(const std::string& command, json inputs, const ToleranceConfig& tol) {
    json j;
    j["schema"] = 1;
    j["command"] = command;
    j["inputs"] = std::move(inputs);
    j["tolerances"] = tolerances_to_json(tol);
    return j;
}

json sdp_margins(const SdpReport& r) {
    json a = json::array();
    for (size_t k = 0; k < r.margins.size(); ++k)
        a.push_back({{"name", r.block_names[k]}, {"kind", "psd"}, {"value", r.margins[k]}});
    return a;
}

json lp_margins(const LpProblem& p, const LpReport& r) {
    json a = json::array();
    for (Eigen::Index i = 0; i < r.slacks.size(); ++i)
        a.push_back({{"name", p.row_names[i]}, {"kind", "slack"}, {"value", r.slacks(i) + 0.0}});
    return a;
}

json solve_loaded(const json& pj, json& out) {
    const std::string kind = pj.value("kind", "");
    if (kind == "lp") {
        LpProblem p = lp_from_json(pj);
        auto r = solve_lp(p);
        out["value"] = r.objective;
        out["status"] = to_string(r.status);
        out["dual_bound"] = r.dual_bound;
        out["method"] = "lp";
        return r.status == SolveStatus::Optimal ? lp_margins(p, r) : json::array();
    }
    SdpProblem p = sdp_from_json(pj);
    auto r = solve_sdp(p);
    out["value"] = r.objective;
    out["status"] = to_string(r.status);
    out["dual_bound"] = r.dual_bound;
    out["method"] = "sdp";
    return sdp_margins(r);
}

Output cmd_prob(const std::string& source, const std::string& target, const std::string& mode_s,
                const std::string& ppt, const std::string& file, const ToleranceConfig& tol) {
    Output o;
    if (!file.empty()) {
        std::ifstream in(file);
        if (!in) throw std::invalid_argument("cannot read problem file " + file);
        json pj = json::parse(in);
        o.doc = envelope("prob", {{"problem_file", file}}, tol);
        o.doc["margins"] = solve_loaded(pj, o.doc);
        return o;
    }
    if (source.empty() || target.empty()) throw std::invalid_argument("prob needs --source and --target (or --problem-file)");
    Mode mode = parse_mode(mode_s);
    auto parties = ppt.empty() ? std::vector<std::string>{} : split_list(ppt);
    auto r = optimal_probability(source, target, mode, parties, tol);
    if (parties.empty()) parties = ChoiSpace(named_state(source).space, named_state(target).space).parties();
    o.doc = envelope("prob", {{"source", source}, {"target", target}, {"mode", to_string(mode)}, {"ppt", parties}}, tol);
    o.doc["value"] = r.value;
    o.doc["method"] = r.method;
    o.doc["symmetry"] = r.symmetry;
    o.doc["variables"] = r.variables;
    if (r.method == "lp") {
        const int d = named_state(source).space.dims()[0], dp = named_state(target).space.dims()[0];
        LpProblem lp = bipartite_lp(d, dp, mode);
        o.doc["status"] = to_string(r.lp.status);
        o.doc["dual_bound"] = r.lp.dual_bound;
        o.doc["margins"] = r.lp.status == SolveStatus::Optimal ? lp_margins(lp, r.lp) : json::array();
    } else {
        o.doc["status"] = to_string(r.sdp.status);
        o.doc["dual_bound"] = r.sdp.dual_bound;
        o.doc["iterations"] = r.sdp.iterations;
        o.doc["margins"] = sdp_margins(r.sdp);
    }
    return o;
}

Output cmd_verify(const std::string& name, const std::string& part, const ToleranceConfig& tol) {
    Output o;
    Certificate c = build_certificate(name);
    o.doc = envelope("verify", {{"certificate", name}, {"part", part}}, tol);
    std::vector<VerificationReport> reps;
    if ((part == "primal" || part == "auto") && c.omega) reps.push_back(verify_primal(c, tol));
    if ((part == "dual" || part == "auto") && c.dual) reps.push_back(verify_dual(c, tol));
    if (reps.empty()) throw std::invalid_argument("certificate '" + name + "' has no " + part + " part");
    bool pass = true;
    json values = json::object(), margins = json::array();
    for (const auto& r : reps) {
        pass = pass && r.pass;
        values[r.part] = r.objective;
        for (const auto& m : r.margins) {
            json mj = margin_to_json(m);
            mj["part"] = r.part;
            margins.push_back(mj);
        }
    }
    o.doc["pass"] = pass;
    if (reps.size() == 1) o.doc["value"] = reps[0].objective;
    else o.doc["values"] = values;
    o.doc["claimed"] = c.claimed_value;
    json reports = json::array();
    for (const auto& r : reps) reports.push_back(report_to_json(r));
    o.doc["reports"] = reports;
    o.doc["margins"] = margins;
    o.code = pass ? 0 : 2;
    return o;
}

json cut_margins(const PureState& s, const std::string& role) {
    json a = json::array();
    for (const auto& l : s.space.labels()) {
        double v = min_eig(partial_transpose(s.rho(), s.space.dims(), {s.space.index_of(l)}));
        a.push_back({{"name", role + " PT " + l}, {"kind", "psd"}, {"value", v}});
    }
    return a;
}

Output cmd_decide(const std::string& src, const std::string& tgt, const ToleranceConfig& tol) {
    Output o;
    PureState a = parse_pure_state(src), b = parse_pure_state(tgt);
    auto c = decide_convertibility(a, b);
    o.doc = envelope("decide", {{"source", src}, {"target", tgt}}, tol);
    o.doc["value"] = c.possible ? "possible" : "impossible";
    o.doc["reason"] = c.reason;
    o.doc["source_npt_parties"] = c.source_npt;
    o.doc["target_npt_parties"] = c.target_npt;
    json m = cut_margins(a, "source");
    for (auto& x : cut_margins(b, "target")) m.push_back(x);
    o.doc["margins"] = m;
    return o;
}

Output cmd_x0(const std::string& src, const std::string& tgt, const std::string& ppt, const ToleranceConfig& tol) {
    Output o;
    PureState a = parse_pure_state(src), b = parse_pure_state(tgt);
    auto parties = ppt.empty() ? ChoiSpace(a.space, b.space).parties() : split_list(ppt);
    auto r = compute_x0(a, b, parties);
    o.doc = envelope("x0", {{"source", src}, {"target", tgt}, {"ppt", parties}}, tol);
    o.doc["value"] = r.x0;
    ChoiSpace cs(a.space, b.space);
    Mat t = cs.gamma_v(trial_omega(a.rho(), b.rho(), r.x0));
    json m = json::array();
    m.push_back({{"name", "T"}, {"kind", "psd"}, {"value", min_eig(t)}});
    for (const auto& p : parties)
        m.push_back({{"name", "T^G" + p}, {"kind", "psd"}, {"value", min_eig(cs.party_pt(t, p))}});
    o.doc["margins"] = m;
    return o;
}

Output cmd_closedform(const std::string& name, const std::string& params, const ToleranceConfig& tol) {
    Output o;
    std::vector<double> ps;
    if (!params.empty())
        for (const auto& t : split_list(params)) {
            size_t used = 0;
            double v = std::stod(t, &used);
            if (used != t.size()) throw std::invalid_argument("bad parameter '" + t + "'");
            ps.push_back(v);
        }
    double v = closed_form(name, ps);
    o.doc = envelope("closedform", {{"name", name}, {"params", ps}}, tol);
    o.doc["value"] = v;
    o.doc["margins"] = json::array();
    return o;
}

Output cmd_highrank(int d, int dp, int rank, int samples, std::uint64_t seed, const ToleranceConfig& tol) {
    Output o;
    auto r = highrank_nogo_experiment(d, dp, rank, samples, seed);
    const bool nogo = rank >= d * d - 2;
    o.doc = envelope("experiment highrank",
                     {{"d", d}, {"dprime", dp}, {"rank", rank}, {"samples", samples}, {"seed", seed}}, tol);
    json vals = json::array();
    for (const auto& s : r.samples) vals.push_back(s.optimum);
    o.doc["values"] = vals;
    o.doc["max_optimum"] = r.max_optimum;
    o.doc["threshold"] = r.threshold;
    o.doc["nogo_branch"] = nogo;
    o.doc["all_below_threshold"] = r.all_below;
    o.doc["control_value"] = r.control;
    o.doc["draws"] = r.attempts;
    json m = json::array();
    for (const auto& s : r.samples)
        m.push_back({{"name", "sample " + std::to_string(s.index)},
                     {"kind", "pt_min_eig"},
                     {"value", s.pt_min_eig},
                     {"draw", s.attempt},
                     {"status", s.status}});
    o.doc["margins"] = m;
    o.code = (nogo && !r.all_below) ? 2 : 0;
    return o;
}

Output cmd_dump(const std::string& cert, const std::string& state, const std::string& source,
                const std::string& target, const std::string& mode_s, const std::string& ppt,
                const ToleranceConfig& tol) {
    Output o;
    const int picked = int(!cert.empty()) + int(!state.empty()) + int(!source.empty() || !target.empty());
    if (picked != 1) throw std::invalid_argument("dump needs exactly one of --certificate, --state, --source/--target");
    if (!cert.empty()) {
        Certificate c = build_certificate(cert);
        o.doc = envelope("dump", {{"certificate", cert}}, tol);
        o.doc["certificate"] = certificate_to_json(c);
        std::vector<VerificationReport> reps;
        if (c.omega) reps.push_back(verify_primal(c, tol));
        if (c.dual) reps.push_back(verify_dual(c, tol));
        json margins = json::array();
        std::string table;
        for (const auto& r : reps) {
            for (const auto& m : r.margins) {
                json mj = margin_to_json(m);
                mj["part"] = r.part;
                margins.push_back(mj);
            }
            table += "[" + r.part + "] objective " + json(r.objective).dump() + ", claimed " + json(r.claimed).dump() +
                     (r.pass ? ", pass\n" : ", FAIL\n") + margin_table(r.margins);
        }
        o.doc["margins"] = margins;
        o.doc["margin_table"] = table;
        return o;
    }
    if (!state.empty()) {
        PureState s = parse_pure_state(state);
        o.doc = envelope("dump", {{"state", state}}, tol);
        o.doc["state"] = state_to_json(s.space, s.rho());
        o.doc["margins"] = json::array();
        return o;
    }
    if (source.empty() || target.empty()) throw std::invalid_argument("dump of a problem needs --source and --target");
    Mode mode = parse_mode(mode_s);
    auto parties = ppt.empty() ? std::vector<std::string>{} : split_list(ppt);
    NamedState s = named_state(source), t = named_state(target);
    if (!t.pure) throw std::invalid_argument("target state must be pure");
    ConversionSpec spec{ChoiSpace(s.space, t.space), s.rho, t.rho, mode, parties};
    auto sym = registered_symmetry(source, target, spec.space);
    o.doc = envelope("dump", {{"source", source}, {"target", target}, {"mode", to_string(mode)},
                              {"ppt", effective_ppt_parties(spec)}}, tol);
    if (sym && sym->first == "isotropic x isotropic" && mode != Mode::None) {
        const int d = s.space.dims()[0], dp = t.space.dims()[0];
        o.doc["problem"] = lp_to_json(bipartite_lp(d, dp, mode));
    } else {
        auto cp = sym ? build_conversion_problem(spec, sym->second) : build_conversion_problem(spec);
        o.doc["problem"] = sdp_to_json(cp.sdp);
    }
    o.doc["symmetry"] = sym ? sym->first : "none";
    o.doc["margins"] = json::array();
    return o;
}

std::string scalar_text(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

void print_table(const json& doc) {
    std::vector<std::pair<std::string, std::string>> rows;
    for (const auto& [k, v] : doc.items()) {
        if (k == "margins" || k == "reports" || k == "certificate" || k == "problem" || k == "state" ||
            k == "margin_table")
            continue;
        if (v.is_object()) {
            for (const auto& [k2, v2] : v.items()) rows.push_back({k + "." + k2, scalar_text(v2)});
        } else {
            rows.push_back({k, scalar_text(v)});
        }
    }
    size_t w = 0;
    for (const auto& r : rows) w = std::max(w, r.first.size());
    for (const auto& r : rows) std::cout << std::left << std::setw(int(w)) << r.first << "  " << r.second << "\n";
    if (doc.contains("margins") && !doc["margins"].empty()) {
        std::cout << "\n";
        size_t mw = 4;
        for (const auto& m : doc["margins"]) mw = std::max(mw, m.value("name", std::string()).size() + 9);
        for (const auto& m : doc["margins"]) {
            std::string name = m.value("name", std::string());
            if (m.contains("part")) name = "[" + m["part"].get<std::string>() + "] " + name;
            std::cout << std::left << std::setw(int(mw)) << name << "  " << std::setw(10) << m.value("kind", std::string())
                      << "  " << scalar_text(m["value"]);
            if (m.contains("pass")) std::cout << (m["pass"].get<bool>() ? "  ok" : "  FAIL");
            std::cout << "\n";
        }
    }
    if (doc.contains("margin_table")) std::cout << "\n" << doc["margin_table"].get<std::string>();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PPT entanglement-conversion probabilities and certificates"};
    app.require_subcommand(1);
    app.fallthrough();
    app.footer("Environment: PPT_FORGE_TOL overrides gap_tol.\n"
               "Exit codes: 0 ok, 1 usage error, 2 verification failure.");
    Globals g;
    auto* fmt = app.add_option_group("output");
    auto* json_flag = fmt->add_flag("--json", "JSON output (default)");
    fmt->add_flag("--table", g.table, "aligned table output");
    fmt->require_option(0, 1);
    (void)json_flag;
    app.add_option("--seed", g.seed, "seed of the counter-based generator")->default_val(0);
    app.add_flag("--no-timing", g.no_timing, "report elapsed_ms as 0 (byte-identical output)");

    std::string source, target, mode = "tp", ppt, file, cert, part = "auto", name, params, state;
    int d = 2, dp = 2, rank = 2, samples = 20;

    auto* prob = app.add_subcommand("prob", "optimal conversion probability");
    prob->add_option("--source", source, "source state: phi<d>, werner<d>, ghz<N>, w3");
    prob->add_option("--target", target, "pure target state");
    prob->add_option("--mode", mode, "tp, tnp or none")->default_val("tp");
    prob->add_option("--ppt", ppt, "comma-separated parties with PPT cones (default all)");
    prob->add_option("--problem-file", file, "solve a dumped problem instead");

    auto* verify = app.add_subcommand("verify", "verify a built-in certificate");
    verify->add_option("--certificate", cert, "certificate name, e.g. ghz-w-tp or w-ghz-tnp-dual(0.001)")->required();
    verify->add_option("--part", part, "primal, dual or auto")->check(CLI::IsMember({"primal", "dual", "auto"}));

    auto* decide = app.add_subcommand("decide", "PPT convertibility of pure states");
    decide->add_option("--source", source, "state expression, e.g. phi2:AB*ket0:C")->required();
    decide->add_option("--target", target, "state expression")->required();

    auto* x0 = app.add_subcommand("x0", "largest x of the trial form");
    x0->add_option("--source", source, "state expression")->required();
    x0->add_option("--target", target, "state expression")->required();
    x0->add_option("--ppt", ppt, "comma-separated parties (default all)");

    auto* cf = app.add_subcommand("closedform", "evaluate a closed-form optimum");
    cf->add_option("--name", name, "mes_tp, mes_tnp, negativity_ratio, aws, ghz_w_tp, ghz_w_tnp, w_ghz_tnp, unlock_opt, x0_unlock")
        ->required();
    cf->add_option("--params", params, "comma-separated parameters, e.g. 2,3");

    auto* exp = app.add_subcommand("experiment", "numerical experiments");
    exp->require_subcommand(1);
    auto* hr = exp->add_subcommand("highrank", "distillation optima of random high-rank NPT states");
    hr->add_option("--d", d, "local input dimension")->default_val(2);
    hr->add_option("--dprime", dp, "target dimension")->default_val(2);
    hr->add_option("--rank", rank, "rank of the sampled states")->default_val(2);
    hr->add_option("--samples", samples, "number of NPT samples")->default_val(20);

    auto* dump = app.add_subcommand("dump", "dump a certificate, state or problem as JSON");
    dump->add_option("--certificate", cert, "certificate name");
    dump->add_option("--state", state, "state expression");
    dump->add_option("--source", source, "problem source state");
    dump->add_option("--target", target, "problem target state");
    dump->add_option("--mode", mode, "tp, tnp or none")->default_val("tp");
    dump->add_option("--ppt", ppt, "comma-separated parties");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n" << "run with --help for usage\n";
        return 1;
    }

    const auto t0 = std::chrono::steady_clock::now();
    Output out;
    try {
        ToleranceConfig tol = ToleranceConfig::from_env();
        tol.validate();
        if (*prob) out = cmd_prob(source, target, mode, ppt, file, tol);
        else if (*verify) out = cmd_verify(cert, part, tol);
        else if (*decide) out = cmd_decide(source, target, tol);
        else if (*x0) out = cmd_x0(source, target, ppt, tol);
        else if (*cf) out = cmd_closedform(name, params, tol);
        else if (*hr) out = cmd_highrank(d, dp, rank, samples, g.seed, tol);
        else if (*dump) out = cmd_dump(cert, state, source, target, mode, ppt, tol);
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    out.doc["elapsed_ms"] = g.no_timing ? 0.0 : ms;
    if (g.table) print_table(out.doc);
    else std::cout << out.doc.dump(2) << "\n";
    return out.code;
}
