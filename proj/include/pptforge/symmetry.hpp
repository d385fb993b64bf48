#pragma once

#include "multipartite.hpp"

#include <cstdint>
#include <deque>
#include <map>

namespace pptforge {

// Column c of U is phase[c] * e_{perm[c]}.
struct Monomial {
    std::vector<int> perm;
    std::vector<cplx> phase;

    int dim() const { return static_cast<int>(perm.size()); }

    static std::optional<Monomial> from_matrix(const Mat& u, double tol = 1e-12) {
        const int n = static_cast<int>(u.rows());
        Monomial m{std::vector<int>(n), std::vector<cplx>(n)};
        std::vector<int> used(n, 0);
        for (int c = 0; c < n; ++c) {
            int found = -1;
            for (int r = 0; r < n; ++r) {
                if (std::abs(u(r, c)) > tol) {
                    if (found >= 0) return std::nullopt;
                    found = r;
                }
            }
            if (found < 0 || used[found]) return std::nullopt;
            used[found] = 1;
            m.perm[c] = found;
            m.phase[c] = u(found, c);
        }
        return m;
    }

    Mat matrix() const {
        Mat u = Mat::Zero(dim(), dim());
        for (int c = 0; c < dim(); ++c) u(perm[c], c) = phase[c];
        return u;
    }

    Monomial operator*(const Monomial& b) const {
        Monomial r{std::vector<int>(dim()), std::vector<cplx>(dim())};
        for (int c = 0; c < dim(); ++c) {
            r.perm[c] = perm[b.perm[c]];
            r.phase[c] = b.phase[c] * phase[b.perm[c]];
        }
        return r;
    }

    // divide by the phase of the first nonzero entry in row-major order (row 0)
    void canonicalize() {
        int c0 = 0;
        while (perm[c0] != 0) ++c0;
        cplx p = phase[c0] / std::abs(phase[c0]);
        for (auto& x : phase) x /= p;
    }
};

struct Twirl {
    enum class Kind { Isotropic, Werner };
    Kind kind;
    int f1, f2;  // factor indices, equal dimensions
};

class SymmetryGroup {
public:
    enum class Kind { Finite, Twirls };

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    size_t order() const { return kind_ == Kind::Finite ? elements_.size() : 0; }
    const std::vector<Mat>& elements() const { return elements_; }
    bool monomial() const { return !mono_.empty() || elements_.empty(); }
    const std::vector<Monomial>& monomials() const { return mono_; }
    const std::vector<int>& factor_dims() const { return dims_; }
    const std::vector<Twirl>& twirls() const { return twirls_; }

    static SymmetryGroup twirls(std::vector<int> dims, std::vector<Twirl> tw) {
        SymmetryGroup g;
        g.kind_ = Kind::Twirls;
        g.dims_ = std::move(dims);
        g.twirls_ = std::move(tw);
        g.dim_ = detail::prod(g.dims_);
        std::vector<int> used(g.dims_.size(), 0);
        for (const auto& t : g.twirls_) {
            if (t.f1 == t.f2 || t.f1 < 0 || t.f2 < 0 || t.f1 >= int(g.dims_.size()) || t.f2 >= int(g.dims_.size()))
                throw std::invalid_argument("twirl: bad factor pair");
            if (g.dims_[t.f1] != g.dims_[t.f2]) throw std::invalid_argument("twirl: factor dimensions differ");
            if (used[t.f1]++ || used[t.f2]++) throw std::invalid_argument("twirl: overlapping factor pairs");
        }
        return g;
    }

    static SymmetryGroup from_elements(std::vector<Mat> els) {
        SymmetryGroup g;
        g.kind_ = Kind::Finite;
        g.dim_ = static_cast<int>(els.front().rows());
        g.elements_ = std::move(els);
        for (const auto& e : g.elements_) {
            auto m = Monomial::from_matrix(e);
            if (!m) { g.mono_.clear(); break; }
            g.mono_.push_back(*m);
        }
        return g;
    }

private:
    Kind kind_ = Kind::Finite;
    int dim_ = 0;
    std::vector<Mat> elements_;
    std::vector<Monomial> mono_;
    std::vector<int> dims_;
    std::vector<Twirl> twirls_;
};

namespace detail {

inline std::int64_t qround(double x) { return static_cast<std::int64_t>(std::llround(x * 1e8)); }

inline std::vector<std::int64_t> mono_key(const Monomial& m) {
    std::vector<std::int64_t> k;
    k.reserve(3 * m.perm.size());
    for (int c = 0; c < m.dim(); ++c) {
        k.push_back(m.perm[c]);
        k.push_back(qround(m.phase[c].real()));
        k.push_back(qround(m.phase[c].imag()));
    }
    return k;
}

inline Mat canonical_phase(const Mat& u) {
    for (Eigen::Index r = 0; r < u.rows(); ++r)
        for (Eigen::Index c = 0; c < u.cols(); ++c)
            if (std::abs(u(r, c)) > 1e-9) return u / (u(r, c) / std::abs(u(r, c)));
    return u;
}

inline std::vector<std::int64_t> dense_key(const Mat& u) {
    std::vector<std::int64_t> k;
    k.reserve(2 * u.size());
    for (Eigen::Index r = 0; r < u.rows(); ++r)
        for (Eigen::Index c = 0; c < u.cols(); ++c) {
            k.push_back(qround(u(r, c).real()));
            k.push_back(qround(u(r, c).imag()));
        }
    return k;
}

}  // namespace detail

// BFS closure with phase-canonical deduplication.
inline SymmetryGroup generate_group(const std::vector<Mat>& gens, size_t cap = 100000) {
    if (gens.empty()) throw std::invalid_argument("generate_group: no generators");
    const int n = static_cast<int>(gens.front().rows());
    for (const auto& g : gens) {
        if (g.rows() != n || g.cols() != n) throw std::invalid_argument("generate_group: generator dimension mismatch");
        if (max_abs(g * g.adjoint() - Mat::Identity(n, n)) > 1e-12)
            throw std::invalid_argument("generate_group: generator is not unitary");
    }
    std::vector<Monomial> mg;
    for (const auto& g : gens) {
        auto m = Monomial::from_matrix(g);
        if (!m) { mg.clear(); break; }
        mg.push_back(*m);
    }
    std::vector<Mat> out;
    if (mg.size() == gens.size()) {
        Monomial id{std::vector<int>(n), std::vector<cplx>(n, 1.0)};
        std::iota(id.perm.begin(), id.perm.end(), 0);
        std::map<std::vector<std::int64_t>, size_t> seen;
        std::vector<Monomial> els{id};
        seen[detail::mono_key(id)] = 0;
        std::deque<size_t> queue{0};
        while (!queue.empty()) {
            size_t a = queue.front();
            queue.pop_front();
            for (const auto& g : mg) {
                Monomial b = g * els[a];
                b.canonicalize();
                auto key = detail::mono_key(b);
                if (seen.count(key)) continue;
                if (els.size() >= cap)
                    throw std::runtime_error("generate_group: cap " + std::to_string(cap) +
                                             " exceeded (continuous group?)");
                seen[key] = els.size();
                els.push_back(b);
                queue.push_back(els.size() - 1);
            }
        }
        for (const auto& e : els) out.push_back(e.matrix());
    } else {
        std::map<std::vector<std::int64_t>, size_t> seen;
        out.push_back(Mat::Identity(n, n));
        seen[detail::dense_key(out[0])] = 0;
        std::deque<size_t> queue{0};
        while (!queue.empty()) {
            size_t a = queue.front();
            queue.pop_front();
            for (const auto& g : gens) {
                Mat b = detail::canonical_phase(g * out[a]);
                auto key = detail::dense_key(b);
                if (seen.count(key)) continue;
                if (out.size() >= cap)
                    throw std::runtime_error("generate_group: cap " + std::to_string(cap) +
                                             " exceeded (continuous group?)");
                seen[key] = out.size();
                out.push_back(b);
                queue.push_back(out.size() - 1);
            }
        }
    }
    return SymmetryGroup::from_elements(std::move(out));
}

namespace detail {

// apply X -> sum_k tr_pair(X (Q_k (x) 1)) Q_k / tr(Q_k) on one factor pair
inline Mat twirl_pair(const Mat& x, const std::vector<int>& dims, const Twirl& t) {
    const int d = dims[t.f1];
    std::vector<int> perm(dims.size());
    // move f1 -> 0, f2 -> 1, keep the rest in order
    int next = 2;
    for (size_t k = 0; k < dims.size(); ++k) {
        if (int(k) == t.f1) perm[k] = 0;
        else if (int(k) == t.f2) perm[k] = 1;
        else perm[k] = next++;
    }
    std::vector<int> pd(dims.size());
    for (size_t k = 0; k < dims.size(); ++k) pd[perm[k]] = dims[k];
    Mat y = permute_factors(x, dims, perm);
    const int rest = prod(dims) / (d * d);
    Mat q1, q2;
    if (t.kind == Twirl::Kind::Isotropic) {
        q1 = projector(phi_plus(d));
        q2 = Mat::Identity(d * d, d * d) - q1;
    } else {
        q1 = proj_sym(d);
        q2 = proj_antisym(d);
    }
    std::vector<int> rd{d * d, rest};
    Mat r = Mat::Zero(y.rows(), y.cols());
    for (const Mat* q : {&q1, &q2}) {
        Mat red = partial_trace(y * kron(*q, Mat::Identity(rest, rest)), rd, {1});
        r += kron(*q, red) / q->trace().real();
    }
    std::vector<int> inv(dims.size());
    for (size_t k = 0; k < dims.size(); ++k) inv[perm[k]] = int(k);
    return permute_factors(r, pd, inv);
}

}  // namespace detail

inline Mat average_project(const Mat& x, const SymmetryGroup& g) {
    if (x.rows() != g.dim()) throw std::invalid_argument("average_project: dimension mismatch");
    if (g.kind() == SymmetryGroup::Kind::Twirls) {
        Mat r = x;
        for (const auto& t : g.twirls()) r = detail::twirl_pair(r, g.factor_dims(), t);
        return r;
    }
    const int n = g.dim();
    Mat acc = Mat::Zero(n, n);
    if (!g.monomials().empty()) {
        for (const auto& m : g.monomials())
            for (int c = 0; c < n; ++c)
                for (int r = 0; r < n; ++r)
                    acc(m.perm[r], m.perm[c]) += m.phase[r] * x(r, c) * std::conj(m.phase[c]);
    } else {
        for (const auto& u : g.elements()) acc += u * x * u.adjoint();
    }
    return acc / double(g.order());
}

inline HermitianOperator average_project(const HermitianOperator& x, const SymmetryGroup& g) {
    return HermitianOperator(average_project(x.matrix(), g), false);
}

struct InvariantBasis {
    std::vector<Mat> ops;
    RMat gram;

    int size() const { return static_cast<int>(ops.size()); }
};

namespace detail {

inline RMat gram_of(const std::vector<Mat>& ops) {
    RMat g(ops.size(), ops.size());
    for (size_t i = 0; i < ops.size(); ++i)
        for (size_t j = 0; j < ops.size(); ++j) g(i, j) = hs_inner(ops[i], ops[j]);
    return g;
}

// Gram-Schmidt over Hermitian candidates; returns orthonormal independent set
inline std::vector<Mat> orthonormalize(const std::vector<Mat>& cand, double tol = 1e-9) {
    std::vector<Mat> out;
    for (const auto& c0 : cand) {
        Mat c = c0;
        double n0 = std::sqrt(hs_inner(c, c));
        if (n0 < 1e-12) continue;
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : out) c -= hs_inner(b, c) * b;
        double n1 = std::sqrt(hs_inner(c, c));
        if (n1 > tol * n0) out.push_back(c / n1);
    }
    return out;
}

// orthonormal Hermitian basis of n x n matrices
inline std::vector<Mat> hermitian_basis(int n) {
    std::vector<Mat> b;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            Mat e = Mat::Zero(n, n);
            if (i == j) {
                e(i, i) = 1.0;
                b.push_back(e);
            } else {
                e(i, j) = e(j, i) = 1.0 / std::sqrt(2.0);
                b.push_back(e);
                Mat f = Mat::Zero(n, n);
                f(i, j) = I_UNIT / std::sqrt(2.0);
                f(j, i) = -I_UNIT / std::sqrt(2.0);
                b.push_back(f);
            }
        }
    return b;
}

}  // namespace detail

inline std::vector<Mat> full_hermitian_basis(int n) { return detail::hermitian_basis(n); }

// Dimension of the fixed-point space = trace of the averaging superoperator.
inline double averaging_trace(const SymmetryGroup& g) {
    if (g.kind() == SymmetryGroup::Kind::Twirls) {
        std::vector<int> covered(g.factor_dims().size(), 0);
        double dimv = 1.0;
        for (const auto& t : g.twirls()) {
            covered[t.f1] = covered[t.f2] = 1;
            dimv *= 2.0;
        }
        for (size_t k = 0; k < covered.size(); ++k)
            if (!covered[k]) dimv *= double(g.factor_dims()[k]) * g.factor_dims()[k];
        return dimv;
    }
    double s = 0.0;
    for (const auto& u : g.elements()) s += std::norm(u.trace());
    return s / double(g.order());
}

inline InvariantBasis invariant_basis(const SymmetryGroup& g) {
    InvariantBasis ib;
    const int n = g.dim();
    if (g.kind() == SymmetryGroup::Kind::Twirls) {
        const auto& dims = g.factor_dims();
        // order: twirled pairs first (in given order), then uncovered factors
        std::vector<int> perm(dims.size(), -1);
        int pos = 0;
        std::vector<std::vector<Mat>> parts;
        for (const auto& t : g.twirls()) {
            perm[t.f1] = pos++;
            perm[t.f2] = pos++;
            const int d = dims[t.f1];
            if (t.kind == Twirl::Kind::Isotropic) {
                Mat p = projector(phi_plus(d));
                parts.push_back({p, Mat(Mat::Identity(d * d, d * d) - p)});
            } else {
                parts.push_back({proj_sym(d), proj_antisym(d)});
            }
        }
        int rest = 1;
        std::vector<int> pd;
        for (const auto& t : g.twirls()) { pd.push_back(dims[t.f1]); pd.push_back(dims[t.f2]); }
        for (size_t k = 0; k < dims.size(); ++k)
            if (perm[k] < 0) { perm[k] = pos++; rest *= dims[k]; pd.push_back(dims[k]); }
        if (rest > 1) parts.push_back(detail::hermitian_basis(rest));
        std::vector<int> inv(dims.size());
        for (size_t k = 0; k < dims.size(); ++k) inv[perm[k]] = int(k);
        std::vector<Mat> prods{Mat::Identity(1, 1)};
        for (const auto& part : parts) {
            std::vector<Mat> next;
            for (const auto& a : prods)
                for (const auto& b : part) next.push_back(kron(a, b));
            prods = std::move(next);
        }
        for (auto& p : prods) ib.ops.push_back(permute_factors(p, pd, inv));
    } else if (!g.monomials().empty()) {
        std::vector<int> done(size_t(n) * n, 0);
        std::vector<Mat> cand;
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                if (done[size_t(r) * n + c]) continue;
                Mat b = Mat::Zero(n, n);
                for (const auto& m : g.monomials()) {
                    int r2 = m.perm[r], c2 = m.perm[c];
                    b(r2, c2) += m.phase[r] * std::conj(m.phase[c]);
                    done[size_t(r2) * n + c2] = 1;
                    done[size_t(c2) * n + r2] = 1;
                }
                b /= double(g.order());
                if (max_abs(b) < 1e-12) continue;
                cand.push_back(b + b.adjoint());
                cand.push_back(I_UNIT * (b - b.adjoint()));
            }
        ib.ops = detail::orthonormalize(cand);
    } else {
        std::vector<Mat> cand;
        for (const auto& e : detail::hermitian_basis(n)) cand.push_back(average_project(e, g));
        ib.ops = detail::orthonormalize(cand);
    }
    ib.gram = detail::gram_of(ib.ops);
    return ib;
}

}  // namespace pptforge
