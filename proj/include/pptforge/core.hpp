#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

namespace pptforge {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline constexpr cplx I_UNIT{0.0, 1.0};

struct ToleranceConfig {
    double psd_abs = 1e-10;
    double psd_rel = 1e-9;
    double eq_tol = 1e-9;
    double gap_tol = 1e-7;

    void validate() const {
        if (!(psd_abs > 0 && psd_rel > 0 && eq_tol > 0 && gap_tol > 0))
            throw std::invalid_argument("tolerances must be strictly positive");
    }

    // PPT_FORGE_TOL overrides gap_tol
    static ToleranceConfig from_env() {
        ToleranceConfig t;
        if (const char* s = std::getenv("PPT_FORGE_TOL")) {
            char* end = nullptr;
            double v = std::strtod(s, &end);
            if (end == s || !(v > 0) || !std::isfinite(v))
                throw std::invalid_argument(std::string("bad PPT_FORGE_TOL: ") + s);
            t.gap_tol = v;
        }
        return t;
    }
};

inline double max_abs(const Mat& m) {
    return m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
}

// Stores the symmetrized matrix and how far the input was from Hermitian.
class HermitianOperator {
public:
    HermitianOperator() : m_(Mat::Zero(1, 1)) {}

    explicit HermitianOperator(const Mat& m, bool strict = true) {
        if (m.rows() != m.cols() || m.rows() < 1)
            throw std::invalid_argument("HermitianOperator: matrix must be square with dim >= 1");
        if (!m.allFinite())
            throw std::invalid_argument("HermitianOperator: non-finite entry");
        defect_ = max_abs(m - m.adjoint());
        if (strict && defect_ > 1e-12 * std::max(1.0, max_abs(m)))
            throw std::invalid_argument("HermitianOperator: hermiticity defect " +
                                        std::to_string(defect_));
        m_ = (m + m.adjoint()) / 2.0;
    }

    static HermitianOperator identity(int n) { return HermitianOperator(Mat::Identity(n, n)); }
    static HermitianOperator zero(int n) { return HermitianOperator(Mat::Zero(n, n)); }

    const Mat& matrix() const { return m_; }
    int dim() const { return static_cast<int>(m_.rows()); }
    double hermiticity_defect() const { return defect_; }
    cplx trace() const { return m_.trace(); }

    HermitianOperator operator+(const HermitianOperator& o) const { return HermitianOperator(m_ + o.m_); }
    HermitianOperator operator-(const HermitianOperator& o) const { return HermitianOperator(m_ - o.m_); }
    HermitianOperator operator*(double s) const { return HermitianOperator(m_ * s); }

private:
    Mat m_;
    double defect_ = 0.0;
};

struct EigResult {
    RVec values;  // ascending
    Mat vectors;  // columns
};

inline EigResult hermitian_eig(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(m);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigensolver failed to converge for dimension " +
                                 std::to_string(m.rows()));
    return {es.eigenvalues(), es.eigenvectors()};
}

inline EigResult hermitian_eig(const HermitianOperator& op) { return hermitian_eig(op.matrix()); }

inline RVec eigenvalues(const Mat& m) {
    if (m.rows() == 0) return RVec();
    Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigensolver failed to converge for dimension " +
                                 std::to_string(m.rows()));
    return es.eigenvalues();
}

inline double min_eig(const Mat& m) {
    if (m.rows() == 0) return 0.0;
    return eigenvalues(Mat((m + m.adjoint()) / 2.0)).minCoeff();
}

inline double max_eig(const Mat& m) {
    if (m.rows() == 0) return 0.0;
    return eigenvalues(Mat((m + m.adjoint()) / 2.0)).maxCoeff();
}

inline double spectral_norm(const Mat& m) {
    if (m.rows() == 0) return 0.0;
    RVec ev = eigenvalues(Mat((m + m.adjoint()) / 2.0));
    return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

struct PsdResult {
    bool psd;
    double min_eigenvalue;
};

inline PsdResult is_psd(const Mat& m, const ToleranceConfig& tol = {}) {
    if (m.rows() == 0) return {true, 0.0};
    RVec ev = eigenvalues(Mat((m + m.adjoint()) / 2.0));
    double lmin = ev(0);
    double nrm = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
    return {lmin >= -(tol.psd_abs + tol.psd_rel * nrm), lmin};
}

inline PsdResult is_psd(const HermitianOperator& op, const ToleranceConfig& tol = {}) {
    return is_psd(op.matrix(), tol);
}

inline double trace_norm(const Mat& m) {
    return eigenvalues(Mat((m + m.adjoint()) / 2.0)).cwiseAbs().sum();
}

inline double trace_norm(const HermitianOperator& op) { return trace_norm(op.matrix()); }

inline double hs_inner(const Mat& a, const Mat& b) {
    // Re tr(a^dagger b)
    return (a.conjugate().cwiseProduct(b)).sum().real();
}

inline Mat kron(const Mat& a, const Mat& b) {
    Mat r(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return r;
}

inline Mat projector(const Vec& v) { return v * v.adjoint(); }

// Orthonormal basis of the span of the columns (rank decided relative to the largest singular value).
inline Mat range_basis(const Mat& m, double rel_tol = 1e-10) {
    if (m.cols() == 0) return Mat(m.rows(), 0);
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU);
    const RVec& s = svd.singularValues();
    double smax = s.size() ? s(0) : 0.0;
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * std::max(smax, 1e-300) && s(i) > 1e-14) ++r;
    return svd.matrixU().leftCols(r);
}

// Orthonormal basis of the null space of a real matrix.
inline RMat null_space(const RMat& a, double rel_tol = 1e-10) {
    const Eigen::Index n = a.cols();
    if (a.rows() == 0) return RMat::Identity(n, n);
    Eigen::JacobiSVD<RMat> svd(a, Eigen::ComputeFullV);
    const RVec& s = svd.singularValues();
    double smax = s.size() ? s(0) : 0.0;
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * std::max(smax, 1.0)) ++r;
    return svd.matrixV().rightCols(n - r);
}

}  // namespace pptforge
