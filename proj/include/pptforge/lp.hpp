#pragma once

#include "core.hpp"

#include <limits>
#include <string>
#include <vector>

namespace pptforge {

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIter };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::MaxIter: return "max_iter";
    }
    return "?";
}

// maximize c^T x  s.t.  A x <= b,  E x = f,  lb <= x <= ub
struct LpProblem {
    RVec c;
    RMat A;
    RVec b;
    RMat E;
    RVec f;
    RVec lb;  // -inf allowed
    RVec ub;  // +inf allowed
    std::vector<std::string> var_names;
    std::vector<std::string> row_names;

    explicit LpProblem(int n = 0)
        : c(RVec::Zero(n)), A(0, n), b(0), E(0, n), f(0),
          lb(RVec::Zero(n)), ub(RVec::Constant(n, std::numeric_limits<double>::infinity())) {}

    int num_vars() const { return static_cast<int>(c.size()); }

    void add_le(const RVec& row, double rhs, std::string name = {}) {
        A.conservativeResize(A.rows() + 1, num_vars());
        A.row(A.rows() - 1) = row.transpose();
        b.conservativeResize(b.size() + 1);
        b(b.size() - 1) = rhs;
        row_names.push_back(std::move(name));
    }
    void add_ge(const RVec& row, double rhs, std::string name = {}) { add_le(-row, -rhs, std::move(name)); }
    void add_eq(const RVec& row, double rhs) {
        E.conservativeResize(E.rows() + 1, num_vars());
        E.row(E.rows() - 1) = row.transpose();
        f.conservativeResize(f.size() + 1);
        f(f.size() - 1) = rhs;
    }
};

// Standard form  min  cs^T s  s.t.  As s = bs, s >= 0, bs >= 0, and the map back.
struct LpStandardForm {
    RMat As;
    RVec bs;
    RVec cs;
    // original x_k = offset_k + sign-combination of standard columns
    RVec offset;
    std::vector<int> pos_col, neg_col;  // -1 when absent

    RVec recover(const RVec& s) const {
        RVec x = offset;
        for (int k = 0; k < x.size(); ++k) {
            if (pos_col[k] >= 0) x(k) += s(pos_col[k]);
            if (neg_col[k] >= 0) x(k) -= s(neg_col[k]);
        }
        return x;
    }
};

struct LpReport {
    SolveStatus status = SolveStatus::MaxIter;
    RVec x;
    double objective = 0.0;
    double dual_bound = 0.0;
    double gap = 0.0;
    std::vector<int> basis;   // standard-form columns, one per row
    RVec reduced_costs;       // phase II, standard form (>= 0 at optimum)
    RVec slacks;              // b - A x for the inequality rows
    LpStandardForm form;
    int iterations = 0;
};

inline LpStandardForm to_standard_form(const LpProblem& p) {
    const int n = p.num_vars();
    LpStandardForm sf;
    sf.offset = RVec::Zero(n);
    sf.pos_col.assign(n, -1);
    sf.neg_col.assign(n, -1);
    int cols = 0;
    std::vector<int> ub_rows;
    for (int k = 0; k < n; ++k) {
        const double lo = p.lb(k), hi = p.ub(k);
        if (std::isfinite(lo)) {
            sf.offset(k) = lo;
            sf.pos_col[k] = cols++;
            if (std::isfinite(hi)) ub_rows.push_back(k);
        } else if (std::isfinite(hi)) {
            // x = hi - s
            sf.offset(k) = hi;
            sf.neg_col[k] = cols++;
        } else {
            sf.pos_col[k] = cols++;
            sf.neg_col[k] = cols++;
        }
    }
    const int nin = static_cast<int>(p.A.rows()) + static_cast<int>(ub_rows.size());
    const int neq = static_cast<int>(p.E.rows());
    const int m = nin + neq;
    const int total = cols + nin;
    sf.As = RMat::Zero(m, total);
    sf.bs = RVec::Zero(m);
    sf.cs = RVec::Zero(total);
    auto put_row = [&](int r, const RVec& row, double rhs) {
        double shift = row.dot(sf.offset);
        for (int k = 0; k < n; ++k) {
            if (sf.pos_col[k] >= 0) sf.As(r, sf.pos_col[k]) += row(k);
            if (sf.neg_col[k] >= 0) sf.As(r, sf.neg_col[k]) -= row(k);
        }
        sf.bs(r) = rhs - shift;
    };
    int r = 0;
    for (Eigen::Index i = 0; i < p.A.rows(); ++i, ++r) {
        put_row(r, p.A.row(i).transpose(), p.b(i));
        sf.As(r, cols + r) = 1.0;
    }
    for (int k : ub_rows) {
        RVec e = RVec::Zero(n);
        e(k) = 1.0;
        put_row(r, e, p.ub(k));
        sf.As(r, cols + r) = 1.0;
        ++r;
    }
    for (Eigen::Index i = 0; i < p.E.rows(); ++i, ++r) put_row(r, p.E.row(i).transpose(), p.f(i));
    for (int i = 0; i < m; ++i)
        if (sf.bs(i) < 0) {
            sf.As.row(i) *= -1.0;
            sf.bs(i) *= -1.0;
        }
    for (int k = 0; k < n; ++k) {
        if (sf.pos_col[k] >= 0) sf.cs(sf.pos_col[k]) -= p.c(k);
        if (sf.neg_col[k] >= 0) sf.cs(sf.neg_col[k]) += p.c(k);
    }
    return sf;
}

namespace detail {

// Tableau simplex with Bland's rule on  min cost^T s, rows T(:, 0..ncol-1) s = T(:, ncol).
struct Tableau {
    RMat t;  // m rows x (ncol + 1)
    std::vector<int> basis;
    int ncol;

    void pivot(int r, int c) {
        t.row(r) /= t(r, c);
        for (Eigen::Index i = 0; i < t.rows(); ++i)
            if (i != r && t(i, c) != 0.0) t.row(i) -= t(i, c) * t.row(r);
        basis[r] = c;
    }

    RVec reduced(const RVec& cost) const {
        RVec y(t.rows());
        for (Eigen::Index i = 0; i < t.rows(); ++i) y(i) = cost(basis[i]);
        RVec rc(ncol);
        for (int j = 0; j < ncol; ++j) rc(j) = cost(j) - y.dot(t.col(j));
        return rc;
    }

    // returns 0 optimal, 1 unbounded, 2 iteration cap
    int run(const RVec& cost, const std::vector<int>& allowed, int& iters, int cap, double eps) {
        while (iters < cap) {
            RVec rc = reduced(cost);
            int enter = -1;
            for (int j = 0; j < ncol; ++j)
                if (allowed[j] && rc(j) < -eps) { enter = j; break; }
            if (enter < 0) return 0;
            int leave = -1;
            double best = 0.0;
            for (Eigen::Index i = 0; i < t.rows(); ++i) {
                if (t(i, enter) > eps) {
                    double ratio = t(i, ncol) / t(i, enter);
                    if (leave < 0 || ratio < best - 1e-14 ||
                        (std::abs(ratio - best) <= 1e-14 && basis[i] < basis[leave])) {
                        leave = int(i);
                        best = ratio;
                    }
                }
            }
            if (leave < 0) return 1;
            pivot(leave, enter);
            ++iters;
        }
        return 2;
    }
};

}  // namespace detail

inline LpReport solve_lp(const LpProblem& p, int max_iter = 10000, double eps = 1e-11) {
    LpReport rep;
    rep.form = to_standard_form(p);
    const auto& sf = rep.form;
    const int m = static_cast<int>(sf.As.rows());
    const int ns = static_cast<int>(sf.As.cols());
    // phase I with one artificial per row
    detail::Tableau tb;
    tb.ncol = ns + m;
    tb.t = RMat::Zero(m, tb.ncol + 1);
    tb.t.leftCols(ns) = sf.As;
    tb.t.block(0, ns, m, m) = RMat::Identity(m, m);
    tb.t.col(tb.ncol) = sf.bs;
    tb.basis.resize(m);
    for (int i = 0; i < m; ++i) tb.basis[i] = ns + i;
    RVec cost1 = RVec::Zero(tb.ncol);
    cost1.tail(m).setOnes();
    std::vector<int> allowed(tb.ncol, 1);
    int iters = 0;
    int st = tb.run(cost1, allowed, iters, max_iter, eps);
    if (st == 2) { rep.status = SolveStatus::MaxIter; rep.iterations = iters; return rep; }
    double art = 0.0;
    for (int i = 0; i < m; ++i)
        if (tb.basis[i] >= ns) art += tb.t(i, tb.ncol);
    if (art > 1e-9 * std::max(1.0, sf.bs.cwiseAbs().maxCoeff())) {
        rep.status = SolveStatus::Infeasible;
        rep.iterations = iters;
        return rep;
    }
    // drive remaining artificials out of the basis where possible
    for (int i = 0; i < m; ++i) {
        if (tb.basis[i] < ns) continue;
        for (int j = 0; j < ns; ++j)
            if (std::abs(tb.t(i, j)) > 1e-9) { tb.pivot(i, j); break; }
    }
    for (int j = ns; j < tb.ncol; ++j) allowed[j] = 0;
    RVec cost2 = RVec::Zero(tb.ncol);
    cost2.head(ns) = sf.cs;
    st = tb.run(cost2, allowed, iters, max_iter, eps);
    rep.iterations = iters;
    if (st == 1) { rep.status = SolveStatus::Unbounded; return rep; }
    if (st == 2) { rep.status = SolveStatus::MaxIter; return rep; }
    RVec s = RVec::Zero(ns);
    for (int i = 0; i < m; ++i)
        if (tb.basis[i] < ns) s(tb.basis[i]) = tb.t(i, tb.ncol);
    rep.status = SolveStatus::Optimal;
    rep.basis = tb.basis;
    rep.reduced_costs = tb.reduced(cost2).head(ns);
    rep.x = sf.recover(s);
    rep.objective = p.c.dot(rep.x);
    // dual multipliers from B^{-1}, which sits in the artificial columns
    RVec y = RVec::Zero(m);
    for (int i = 0; i < m; ++i) y += cost2(tb.basis[i]) * tb.t.block(i, ns, 1, m).transpose();
    rep.dual_bound = p.c.dot(sf.offset) - y.dot(sf.bs);
    rep.gap = rep.dual_bound - rep.objective;
    rep.slacks = p.A.rows() ? RVec(p.b - p.A * rep.x) : RVec();
    return rep;
}

}  // namespace pptforge
