#pragma once

#include "core.hpp"
#include "lp.hpp"

#include <string>
#include <vector>

namespace pptforge {

// maximize c^T x  s.t.  F0_k + sum_i x_i F_i^k >= 0 for every block k,  E x = f
struct SdpProblem {
    struct Block {
        std::string name;
        Mat F0;
        std::vector<Mat> F;
    };
    RVec c;
    double c0 = 0.0;  // constant added to the objective
    std::vector<Block> blocks;
    RMat E;
    RVec f;
    std::vector<std::string> var_names;

    explicit SdpProblem(int n = 0) : c(RVec::Zero(n)), E(0, n), f(0) {}
    int num_vars() const { return static_cast<int>(c.size()); }

    Block& add_block(std::string name, const Mat& F0) {
        blocks.push_back({std::move(name), F0, std::vector<Mat>(num_vars(), Mat::Zero(F0.rows(), F0.cols()))});
        return blocks.back();
    }

    Mat block_value(size_t k, const RVec& x) const {
        Mat s = blocks[k].F0;
        for (int i = 0; i < num_vars(); ++i)
            if (x(i) != 0.0) s += x(i) * blocks[k].F[i];
        return s;
    }
};

struct SdpOptions {
    int max_iter = 100;
    double tol = 1e-9;
    double step = 0.98;
    double diverge = 1e8;
};

struct SdpReport {
    SolveStatus status = SolveStatus::MaxIter;
    RVec x;
    double objective = 0.0;
    double dual_bound = 0.0;
    double gap = 0.0;
    double primal_residual = 0.0;  // equality residual of the dual matrix variable
    double dual_residual = 0.0;
    std::vector<double> margins;   // min eigenvalue of each block at x
    std::vector<std::string> block_names;
    std::vector<Mat> dual_matrices;  // one per block
    int iterations = 0;
    std::string message;

    double worst_margin() const {
        double w = std::numeric_limits<double>::infinity();
        for (double m : margins) w = std::min(w, m);
        return margins.empty() ? 0.0 : w;
    }
};

namespace detail {

inline double step_to_boundary(const Mat& x, const Mat& dx) {
    Eigen::LLT<Mat> llt(x);
    if (llt.info() != Eigen::Success) return 0.0;
    Mat linv_dx = llt.matrixL().solve(dx);
    Mat w = llt.matrixL().solve(Mat(linv_dx.adjoint())).adjoint();
    double lmin = min_eig(w);
    if (lmin >= 0) return std::numeric_limits<double>::infinity();
    return -1.0 / lmin;
}

}  // namespace detail

// Primal-dual path following (HKM direction, Mehrotra predictor-corrector).
// Internally the problem is the dual form  max b^T y, Z = C - sum y_j A_j >= 0
// with C = F0, A_j = -F_j, whose conic dual  min <C, X>, <A_j, X> = b_j, X >= 0
// gives the reported upper bound.
inline SdpReport solve_sdp(const SdpProblem& p, const SdpOptions& opt = {}) {
    SdpReport rep;
    const int n0 = p.num_vars();
    for (const auto& b : p.blocks) rep.block_names.push_back(b.name);

    // eliminate equalities: x = x0 + N z
    RVec x0 = RVec::Zero(n0);
    RMat N = RMat::Identity(n0, n0);
    if (p.E.rows() > 0) {
        Eigen::CompleteOrthogonalDecomposition<RMat> cod(p.E);
        x0 = cod.solve(p.f);
        if ((p.E * x0 - p.f).norm() > 1e-8 * std::max(1.0, p.f.norm())) {
            rep.status = SolveStatus::Infeasible;
            rep.message = "inconsistent equality constraints";
            return rep;
        }
        N = null_space(p.E);
    }
    const int m = static_cast<int>(N.cols());
    const RVec b = N.transpose() * p.c;
    const double cshift = p.c.dot(x0) + p.c0;

    struct Blk {
        Mat C;
        std::vector<Mat> A;
        std::vector<char> nz;
        int n;
    };
    std::vector<Blk> blks;
    for (const auto& bk : p.blocks) {
        Blk B;
        B.n = static_cast<int>(bk.F0.rows());
        if (B.n == 0) continue;
        B.C = bk.F0;
        for (int i = 0; i < n0; ++i)
            if (x0(i) != 0.0) B.C += x0(i) * bk.F[i];
        B.C = (B.C + B.C.adjoint()) / 2.0;
        B.A.resize(m);
        B.nz.resize(m);
        for (int j = 0; j < m; ++j) {
            Mat a = Mat::Zero(B.n, B.n);
            for (int i = 0; i < n0; ++i)
                if (N(i, j) != 0.0) a -= N(i, j) * bk.F[i];
            a = (a + a.adjoint()) / 2.0;
            B.nz[j] = max_abs(a) > 0.0;
            B.A[j] = a;
        }
        blks.push_back(std::move(B));
    }
    const int nb = static_cast<int>(blks.size());
    int ntot = 0;
    for (const auto& B : blks) ntot += B.n;

    auto finish = [&](const RVec& y, const std::vector<Mat>& X) {
        rep.x = x0 + N * y;
        rep.objective = p.c.dot(rep.x) + p.c0;
        double pobj = cshift;
        for (int k = 0; k < nb; ++k) pobj += hs_inner(blks[k].C, X[k]);
        rep.dual_bound = pobj;
        rep.gap = rep.dual_bound - rep.objective;
        rep.margins.clear();
        for (size_t k = 0; k < p.blocks.size(); ++k) rep.margins.push_back(min_eig(p.block_value(k, rep.x)));
        rep.dual_matrices = X;
    };

    if (m == 0 || nb == 0) {
        std::vector<Mat> X;
        for (const auto& B : blks) X.push_back(Mat::Zero(B.n, B.n));
        finish(RVec::Zero(m), X);
        rep.status = rep.worst_margin() >= -1e-9 ? SolveStatus::Optimal : SolveStatus::Infeasible;
        rep.iterations = 0;
        return rep;
    }

    double normA = 0.0, normC = 0.0;
    for (const auto& B : blks) {
        normC = std::max(normC, B.C.norm());
        for (int j = 0; j < m; ++j) normA = std::max(normA, B.A[j].norm());
    }
    double xi = std::max(10.0, std::sqrt(double(ntot)));
    for (int j = 0; j < m; ++j) xi = std::max(xi, (1.0 + std::abs(b(j))) / (1.0 + normA));
    double eta = std::max({10.0, std::sqrt(double(ntot)), normA, normC});

    std::vector<Mat> X(nb), Z(nb);
    for (int k = 0; k < nb; ++k) {
        X[k] = xi * Mat::Identity(blks[k].n, blks[k].n);
        Z[k] = eta * Mat::Identity(blks[k].n, blks[k].n);
    }
    RVec y = RVec::Zero(m);

    auto opA = [&](const std::vector<Mat>& M) {
        RVec r = RVec::Zero(m);
        for (int k = 0; k < nb; ++k)
            for (int j = 0; j < m; ++j)
                if (blks[k].nz[j]) r(j) += hs_inner(blks[k].A[j], M[k]);
        return r;
    };
    auto opAt = [&](const RVec& v, int k) {
        Mat s = Mat::Zero(blks[k].n, blks[k].n);
        for (int j = 0; j < m; ++j)
            if (blks[k].nz[j] && v(j) != 0.0) s += v(j) * blks[k].A[j];
        return s;
    };

    const double bnorm = b.norm();
    int it = 0;
    for (; it < opt.max_iter; ++it) {
        RVec rp = b - opA(X);
        std::vector<Mat> Rd(nb);
        double rdn = 0.0, mu = 0.0, pobj = 0.0;
        for (int k = 0; k < nb; ++k) {
            Rd[k] = blks[k].C - Z[k] - opAt(y, k);
            rdn += Rd[k].squaredNorm();
            mu += hs_inner(X[k], Z[k]);
            pobj += hs_inner(blks[k].C, X[k]);
        }
        rdn = std::sqrt(rdn);
        mu /= ntot;
        const double dobj = b.dot(y);
        const double relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
        const double prel = rp.norm() / (1.0 + bnorm);
        const double drel = rdn / (1.0 + normC);
        rep.primal_residual = rp.norm();
        rep.dual_residual = rdn;
        if (relgap < opt.tol && prel < opt.tol && drel < opt.tol) {
            rep.status = SolveStatus::Optimal;
            break;
        }
        if (std::abs(dobj) > opt.diverge || std::abs(pobj) > opt.diverge) {
            rep.status = SolveStatus::Infeasible;
            rep.message = "objective diverged past threshold (flagged, not proven)";
            break;
        }

        std::vector<Mat> Zinv(nb);
        for (int k = 0; k < nb; ++k) {
            Eigen::LLT<Mat> llt(Z[k]);
            Zinv[k] = llt.solve(Mat::Identity(blks[k].n, blks[k].n));
            Zinv[k] = (Zinv[k] + Zinv[k].adjoint()) / 2.0;
        }
        // Schur complement
        RMat M = RMat::Zero(m, m);
        for (int k = 0; k < nb; ++k) {
            std::vector<Mat> G(m);
            for (int j = 0; j < m; ++j)
                if (blks[k].nz[j]) G[j] = X[k] * blks[k].A[j] * Zinv[k];
            for (int i = 0; i < m; ++i) {
                if (!blks[k].nz[i]) continue;
                for (int j = i; j < m; ++j) {
                    if (!blks[k].nz[j]) continue;
                    double v = hs_inner(blks[k].A[i], G[j]);
                    M(i, j) += v;
                    if (j != i) M(j, i) += v;
                }
            }
        }
        Eigen::LDLT<RMat> ldlt(M);
        // near the boundary M loses definiteness in floating point; retry with a small ridge
        const double mdiag = std::max(M.diagonal().cwiseAbs().maxCoeff(), 1e-300);
        for (double ridge = 1e-15; ridge <= 1e-9 && (ldlt.info() != Eigen::Success || !ldlt.isPositive()); ridge *= 100) {
            M.diagonal().array() += ridge * mdiag;
            ldlt.compute(M);
        }
        if (ldlt.info() != Eigen::Success) {
            rep.message = "Schur complement factorization failed";
            break;
        }

        auto direction = [&](const std::vector<Mat>& RX, RVec& dy, std::vector<Mat>& dX, std::vector<Mat>& dZ) {
            RVec rhs = rp - opA(RX);
            dy = ldlt.solve(rhs);
            dX.resize(nb);
            dZ.resize(nb);
            for (int k = 0; k < nb; ++k) {
                dZ[k] = Rd[k] - opAt(dy, k);
                Mat d = RX[k] + X[k] * opAt(dy, k) * Zinv[k];
                dX[k] = (d + d.adjoint()) / 2.0;
            }
        };
        auto rx_for = [&](double sigma_mu, const std::vector<Mat>* cx, const std::vector<Mat>* cz) {
            std::vector<Mat> RX(nb);
            for (int k = 0; k < nb; ++k) {
                Mat r = sigma_mu * Zinv[k] - X[k] - X[k] * Rd[k] * Zinv[k];
                if (cx) r -= (*cx)[k] * (*cz)[k] * Zinv[k];
                RX[k] = r;
            }
            return RX;
        };
        auto steps = [&](const std::vector<Mat>& dX, const std::vector<Mat>& dZ, double& ap, double& ad) {
            ap = ad = std::numeric_limits<double>::infinity();
            for (int k = 0; k < nb; ++k) {
                ap = std::min(ap, detail::step_to_boundary(X[k], dX[k]));
                ad = std::min(ad, detail::step_to_boundary(Z[k], dZ[k]));
            }
        };

        RVec dy;
        std::vector<Mat> dX, dZ;
        direction(rx_for(0.0, nullptr, nullptr), dy, dX, dZ);
        double ap, ad;
        steps(dX, dZ, ap, ad);
        ap = std::min(1.0, ap);
        ad = std::min(1.0, ad);
        double mu_aff = 0.0;
        for (int k = 0; k < nb; ++k) mu_aff += hs_inner(Mat(X[k] + ap * dX[k]), Mat(Z[k] + ad * dZ[k]));
        mu_aff /= ntot;
        double sigma = std::pow(std::max(0.0, mu_aff) / mu, 3.0);
        sigma = std::clamp(sigma, 0.0, 1.0);

        std::vector<Mat> dXa = dX, dZa = dZ;
        direction(rx_for(sigma * mu, &dXa, &dZa), dy, dX, dZ);
        steps(dX, dZ, ap, ad);
        ap = std::min(1.0, opt.step * ap);
        ad = std::min(1.0, opt.step * ad);
        for (int k = 0; k < nb; ++k) {
            X[k] += ap * dX[k];
            Z[k] += ad * dZ[k];
            X[k] = (X[k] + X[k].adjoint()) / 2.0;
            Z[k] = (Z[k] + Z[k].adjoint()) / 2.0;
        }
        y += ad * dy;
    }
    rep.iterations = it;
    finish(y, X);
    return rep;
}

}  // namespace pptforge
