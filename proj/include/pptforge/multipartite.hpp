#pragma once

#include "core.hpp"

#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace pptforge {

struct Factor {
    std::string label;
    int dim;
};

class TensorSpace {
public:
    TensorSpace() = default;
    explicit TensorSpace(std::vector<Factor> f) : factors_(std::move(f)) {
        std::set<std::string> seen;
        for (const auto& x : factors_) {
            if (x.dim < 1) throw std::invalid_argument("factor dimension must be >= 1");
            if (!seen.insert(x.label).second)
                throw std::invalid_argument("duplicate party label " + x.label);
        }
    }

    // n qubits labelled A, B, C, ...
    static TensorSpace qubits(int n, char first = 'A') {
        std::vector<Factor> f;
        for (int i = 0; i < n; ++i) f.push_back({std::string(1, char(first + i)), 2});
        return TensorSpace(f);
    }
    static TensorSpace bipartite(int d) { return TensorSpace({{"A", d}, {"B", d}}); }

    const std::vector<Factor>& factors() const { return factors_; }
    int size() const { return static_cast<int>(factors_.size()); }
    std::vector<int> dims() const {
        std::vector<int> d;
        for (const auto& x : factors_) d.push_back(x.dim);
        return d;
    }
    int total_dim() const {
        int t = 1;
        for (const auto& x : factors_) t *= x.dim;
        return t;
    }
    std::optional<int> find(const std::string& label) const {
        for (int i = 0; i < size(); ++i)
            if (factors_[i].label == label) return i;
        return std::nullopt;
    }
    int index_of(const std::string& label) const {
        auto i = find(label);
        if (!i) throw std::invalid_argument("unknown party label " + label);
        return *i;
    }
    std::vector<int> indices_of(const std::vector<std::string>& labels) const {
        std::vector<int> r;
        for (const auto& l : labels) r.push_back(index_of(l));
        return r;
    }
    std::vector<std::string> labels() const {
        std::vector<std::string> r;
        for (const auto& x : factors_) r.push_back(x.label);
        return r;
    }
    bool operator==(const TensorSpace& o) const {
        if (size() != o.size()) return false;
        for (int i = 0; i < size(); ++i)
            if (factors_[i].label != o.factors_[i].label || factors_[i].dim != o.factors_[i].dim)
                return false;
        return true;
    }

private:
    std::vector<Factor> factors_;
};

namespace detail {

inline std::vector<int> strides(const std::vector<int>& dims) {
    std::vector<int> s(dims.size(), 1);
    for (int i = static_cast<int>(dims.size()) - 2; i >= 0; --i) s[i] = s[i + 1] * dims[i + 1];
    return s;
}

inline int prod(const std::vector<int>& d) {
    return std::accumulate(d.begin(), d.end(), 1, std::multiplies<int>());
}

}  // namespace detail

// Swap the digits of the listed factors between row and column index.
inline Mat partial_transpose(const Mat& m, const std::vector<int>& dims, const std::vector<int>& which) {
    const int n = detail::prod(dims);
    if (m.rows() != n || m.cols() != n) throw std::invalid_argument("partial_transpose: dimension mismatch");
    auto st = detail::strides(dims);
    std::vector<int> sel(dims.size(), 0);
    for (int w : which) {
        if (w < 0 || w >= static_cast<int>(dims.size()))
            throw std::invalid_argument("partial_transpose: bad factor index");
        sel[w] = 1;
    }
    std::vector<int> rowpart(n);  // digit contribution of selected factors
    for (int i = 0; i < n; ++i) {
        int s = 0;
        for (size_t k = 0; k < dims.size(); ++k)
            if (sel[k]) s += ((i / st[k]) % dims[k]) * st[k];
        rowpart[i] = s;
    }
    Mat r(n, n);
    for (int i = 0; i < n; ++i) {
        const int ib = i - rowpart[i];
        for (int j = 0; j < n; ++j) {
            const int jb = j - rowpart[j];
            r(ib + rowpart[j], jb + rowpart[i]) = m(i, j);
        }
    }
    return r;
}

inline Mat partial_transpose(const Mat& m, const TensorSpace& s, const std::vector<std::string>& parties) {
    return partial_transpose(m, s.dims(), s.indices_of(parties));
}

// Trace out every factor not in keep; result ordered as in dims.
inline Mat partial_trace(const Mat& m, const std::vector<int>& dims, const std::vector<int>& keep) {
    const int n = detail::prod(dims);
    if (m.rows() != n) throw std::invalid_argument("partial_trace: dimension mismatch");
    std::vector<int> kd, td, ki, ti;
    std::vector<int> isk(dims.size(), 0);
    for (int k : keep) {
        if (k < 0 || k >= static_cast<int>(dims.size())) throw std::invalid_argument("partial_trace: bad factor index");
        isk[k] = 1;
    }
    for (size_t k = 0; k < dims.size(); ++k) {
        if (isk[k]) { kd.push_back(dims[k]); ki.push_back(int(k)); }
        else { td.push_back(dims[k]); ti.push_back(int(k)); }
    }
    const int nk = detail::prod(kd), nt = detail::prod(td);
    auto st = detail::strides(dims);
    auto kst = detail::strides(kd), tst = detail::strides(td);
    auto full_index = [&](int a, int t) {
        int idx = 0;
        for (size_t q = 0; q < ki.size(); ++q) idx += ((a / kst[q]) % kd[q]) * st[ki[q]];
        for (size_t q = 0; q < ti.size(); ++q) idx += ((t / tst[q]) % td[q]) * st[ti[q]];
        return idx;
    };
    std::vector<int> fi(static_cast<size_t>(nk) * nt);
    for (int a = 0; a < nk; ++a)
        for (int t = 0; t < nt; ++t) fi[size_t(a) * nt + t] = full_index(a, t);
    Mat r = Mat::Zero(nk, nk);
    for (int a = 0; a < nk; ++a)
        for (int b = 0; b < nk; ++b) {
            cplx s = 0;
            for (int t = 0; t < nt; ++t) s += m(fi[size_t(a) * nt + t], fi[size_t(b) * nt + t]);
            r(a, b) = s;
        }
    return r;
}

inline Mat partial_trace(const Mat& m, const TensorSpace& s, const std::vector<std::string>& keep) {
    return partial_trace(m, s.dims(), s.indices_of(keep));
}

// Reorder tensor factors: factor k of the input becomes factor perm[k] of the output.
inline Mat permute_factors(const Mat& m, const std::vector<int>& dims, const std::vector<int>& perm) {
    const int n = detail::prod(dims);
    std::vector<int> nd(dims.size());
    for (size_t k = 0; k < dims.size(); ++k) nd[perm[k]] = dims[k];
    auto st = detail::strides(dims), nst = detail::strides(nd);
    std::vector<int> map(n);
    for (int i = 0; i < n; ++i) {
        int j = 0;
        for (size_t k = 0; k < dims.size(); ++k) j += ((i / st[k]) % dims[k]) * nst[perm[k]];
        map[i] = j;
    }
    Mat r(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) r(map[i], map[j]) = m(i, j);
    return r;
}

// Unitary moving qubit q (q = 0 most significant) to position p[q].
inline Mat qubit_permutation(int nq, const std::vector<int>& p) {
    const int n = 1 << nq;
    Mat u = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        int j = 0;
        for (int q = 0; q < nq; ++q) {
            int bit = (i >> (nq - 1 - q)) & 1;
            j |= bit << (nq - 1 - p[q]);
        }
        u(j, i) = 1.0;
    }
    return u;
}

inline HermitianOperator tensor_product(const HermitianOperator& x, const HermitianOperator& y) {
    return HermitianOperator(kron(x.matrix(), y.matrix()));
}

// ---- canonical states ----

inline Vec basis_ket(int dim, int index) {
    Vec v = Vec::Zero(dim);
    v(index) = 1.0;
    return v;
}

// bit string, first character is the most significant qubit
inline Vec ket_bits(const std::string& bits) {
    int idx = 0;
    for (char c : bits) idx = 2 * idx + (c == '1');
    return basis_ket(1 << bits.size(), idx);
}

inline Vec phi_plus(int d) {
    if (d < 2) throw std::invalid_argument("phi_plus: d >= 2 required");
    Vec v = Vec::Zero(d * d);
    for (int i = 0; i < d; ++i) v(i * d + i) = 1.0 / std::sqrt(double(d));
    return v;
}

inline Vec ghz(int n) {
    if (n < 2) throw std::invalid_argument("ghz: n >= 2 required");
    Vec v = Vec::Zero(1 << n);
    v(0) = v((1 << n) - 1) = 1.0 / std::sqrt(2.0);
    return v;
}

inline Vec w3() {
    Vec v = Vec::Zero(8);
    v(1) = v(2) = v(4) = 1.0 / std::sqrt(3.0);
    return v;
}

inline Mat swap_operator(int d) {
    Mat s = Mat::Zero(d * d, d * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) s(i * d + j, j * d + i) = 1.0;
    return s;
}

inline Mat proj_sym(int d) {
    if (d < 2) throw std::invalid_argument("proj_sym: d >= 2 required");
    return (Mat::Identity(d * d, d * d) + swap_operator(d)) / 2.0;
}

inline Mat proj_antisym(int d) {
    if (d < 2) throw std::invalid_argument("proj_antisym: d >= 2 required");
    return (Mat::Identity(d * d, d * d) - swap_operator(d)) / 2.0;
}

inline Mat werner_antisym(int d) { return proj_antisym(d) * (2.0 / (d * d - d)); }

// ---- Choi operators ----

// Input space V and output space V'. Parties are matched by label; a party may be
// missing from V (trivial input factor) or be given a dimension-1 factor there.
class ChoiSpace {
public:
    ChoiSpace() = default;
    ChoiSpace(TensorSpace in, TensorSpace out) : in_(std::move(in)), out_(std::move(out)) {
        for (const auto& f : out_.factors()) parties_.push_back(f.label);
        for (const auto& f : in_.factors())
            if (!out_.find(f.label)) parties_.push_back(f.label);
    }

    const TensorSpace& input() const { return in_; }
    const TensorSpace& output() const { return out_; }
    int din() const { return in_.total_dim(); }
    int dout() const { return out_.total_dim(); }
    int dim() const { return din() * dout(); }
    const std::vector<std::string>& parties() const { return parties_; }

    std::vector<int> joint_dims() const {
        auto d = in_.dims();
        for (int x : out_.dims()) d.push_back(x);
        return d;
    }
    std::vector<int> input_factors() const {
        std::vector<int> r(in_.size());
        std::iota(r.begin(), r.end(), 0);
        return r;
    }
    std::vector<int> output_factors() const {
        std::vector<int> r;
        for (int i = 0; i < out_.size(); ++i) r.push_back(in_.size() + i);
        return r;
    }
    // joint factor indices (V_i and V'_i) belonging to a party
    std::vector<int> party_factors(const std::string& p) const {
        std::vector<int> r;
        if (auto i = in_.find(p)) r.push_back(*i);
        if (auto j = out_.find(p)) r.push_back(in_.size() + *j);
        if (r.empty()) throw std::invalid_argument("unknown party label " + p);
        return r;
    }
    std::vector<int> input_party_factors(const std::string& p) const {
        std::vector<int> r;
        if (auto i = in_.find(p)) r.push_back(*i);
        return r;
    }

    // Omega^{Gamma_V}
    Mat gamma_v(const Mat& omega) const { return partial_transpose(omega, joint_dims(), input_factors()); }
    // T^{Gamma_{V_i} (x) Gamma_{V'_i}}
    Mat party_pt(const Mat& t, const std::string& p) const {
        return partial_transpose(t, joint_dims(), party_factors(p));
    }
    Mat trace_output(const Mat& omega) const { return partial_trace(omega, joint_dims(), input_factors()); }
    Mat trace_input(const Mat& omega) const { return partial_trace(omega, joint_dims(), output_factors()); }

private:
    TensorSpace in_, out_;
    std::vector<std::string> parties_;
};

struct ChoiOperator {
    HermitianOperator op;
    ChoiSpace space;
};

// Psi(rho) = tr_V{ Omega^{Gamma_V} (rho^{Gamma_V} (x) 1) }
inline Mat choi_apply(const Mat& omega, const ChoiSpace& s, const Mat& rho) {
    if (rho.rows() != s.din() || omega.rows() != s.dim())
        throw std::invalid_argument("choi_apply: dimension mismatch");
    Mat t = s.gamma_v(omega);
    Mat r = kron(rho.transpose(), Mat::Identity(s.dout(), s.dout()));
    return s.trace_input(t * r);
}

inline HermitianOperator choi_apply(const ChoiOperator& c, const HermitianOperator& rho) {
    return HermitianOperator(choi_apply(c.op.matrix(), c.space, rho.matrix()), false);
}

struct SuccessProbability {
    double probability;
    double leakage;  // tr{Omega rho (x) (1 - sigma)}
};

inline SuccessProbability success_probability(const Mat& omega, const Mat& rho, const Mat& sigma) {
    const auto n = sigma.rows();
    if (omega.rows() != rho.rows() * n) throw std::invalid_argument("success_probability: dimension mismatch");
    double p = (omega * kron(rho, sigma)).trace().real();
    double l = (omega * kron(rho, Mat(Mat::Identity(n, n) - sigma))).trace().real();
    return {p, l};
}

inline SuccessProbability success_probability(const ChoiOperator& c, const HermitianOperator& rho,
                                              const HermitianOperator& sigma) {
    if (rho.dim() != c.space.din() || sigma.dim() != c.space.dout())
        throw std::invalid_argument("success_probability: dimension mismatch");
    return success_probability(c.op.matrix(), rho.matrix(), sigma.matrix());
}

inline double negativity(const Mat& rho, const std::vector<int>& dims, const std::vector<int>& cut) {
    return (trace_norm(partial_transpose(rho, dims, cut)) - rho.trace().real()) / 2.0;
}

inline double negativity(const HermitianOperator& rho, const TensorSpace& s, const std::vector<std::string>& cut) {
    return negativity(rho.matrix(), s.dims(), s.indices_of(cut));
}

}  // namespace pptforge
