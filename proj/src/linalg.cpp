#include "qki/linalg.hpp"

#include <cmath>

namespace qki::la {

double clamp_eig(double lambda) {
    if (lambda >= 0.0) return lambda;
    if (lambda >= -kPsdTol) return 0.0;
    throw InvariantViolation("positivity: eigenvalue " + std::to_string(lambda) +
                             " below -" + std::to_string(kPsdTol));
}

HermEig eig_herm(const MatrixXcd& m) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(m);
    if (solver.info() != Eigen::Success)
        throw Error("eig_herm: eigensolver failed to converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

MatrixXcd sqrt_psd(const MatrixXcd& m) {
    HermEig e = eig_herm(m);
    VectorXd s(e.vals.size());
    for (Index i = 0; i < e.vals.size(); ++i) s[i] = std::sqrt(clamp_eig(e.vals[i]));
    return e.vecs * s.asDiagonal() * e.vecs.adjoint();
}

MatrixXcd inv_sqrt_psd(const MatrixXcd& m, double cutoff) {
    HermEig e = eig_herm(m);
    VectorXd s(e.vals.size());
    for (Index i = 0; i < e.vals.size(); ++i) {
        double v = clamp_eig(e.vals[i]);
        s[i] = v > cutoff ? 1.0 / std::sqrt(v) : 0.0;
    }
    return e.vecs * s.asDiagonal() * e.vecs.adjoint();
}

double hermiticity_error(const MatrixXcd& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

MatrixXcd hermitize(const MatrixXcd& m) { return 0.5 * (m + m.adjoint()); }

std::vector<Index> permutation_map(const SystemDims& from, const SystemDims& to) {
    if (from.total() != to.total() || from.count() != to.count())
        throw DimMismatch("permutation_map: slot mismatch");
    const Index n = to.count();
    std::vector<Index> from_pos(static_cast<size_t>(n));
    for (Index k = 0; k < n; ++k) {
        const auto& e = to.at(k);
        Index p = from.position(e.label);
        if (from.at(p).dim != e.dim)
            throw DimMismatch("permutation_map: dim mismatch on '" + e.label + "'");
        from_pos[static_cast<size_t>(k)] = p;
    }
    std::vector<Index> map(static_cast<size_t>(to.total()));
    std::vector<Index> multi(static_cast<size_t>(n), 0);
    for (Index f = 0; f < to.total(); ++f) {
        Index old = 0;
        for (Index k = 0; k < n; ++k)
            old += multi[static_cast<size_t>(k)] * from.stride(from_pos[static_cast<size_t>(k)]);
        map[static_cast<size_t>(f)] = old;
        for (Index k = n - 1; k >= 0; --k) {
            if (++multi[static_cast<size_t>(k)] < to.at(k).dim) break;
            multi[static_cast<size_t>(k)] = 0;
        }
    }
    return map;
}

MatrixXcd permute_matrix(const SystemDims& from, const MatrixXcd& m, const SystemDims& to) {
    auto map = permutation_map(from, to);
    const Index d = m.rows();
    MatrixXcd out(d, d);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j)
            out(i, j) = m(map[static_cast<size_t>(i)], map[static_cast<size_t>(j)]);
    return out;
}

VectorXcd permute_vector(const SystemDims& from, const VectorXcd& v, const SystemDims& to) {
    auto map = permutation_map(from, to);
    VectorXcd out(v.size());
    for (Index i = 0; i < v.size(); ++i) out[i] = v[map[static_cast<size_t>(i)]];
    return out;
}

MatrixXcd partial_trace_raw(const SystemDims& dims, const MatrixXcd& m,
                            const std::vector<std::string>& keep) {
    SystemDims kd = dims.subset_in_order(keep);
    SystemDims td = dims.complement(keep);
    const Index dk = kd.total();
    const Index dt = td.total();

    // Strides of kept / traced slots in the original flat index.
    std::vector<Index> kstr, tstr, kdim, tdim;
    for (const auto& e : kd.entries()) {
        kstr.push_back(dims.stride(dims.position(e.label)));
        kdim.push_back(e.dim);
    }
    for (const auto& e : td.entries()) {
        tstr.push_back(dims.stride(dims.position(e.label)));
        tdim.push_back(e.dim);
    }

    auto offsets = [](const std::vector<Index>& strides, const std::vector<Index>& ds, Index total) {
        std::vector<Index> off(static_cast<size_t>(total), 0);
        std::vector<Index> multi(strides.size(), 0);
        for (Index f = 0; f < total; ++f) {
            Index o = 0;
            for (size_t k = 0; k < strides.size(); ++k) o += multi[k] * strides[k];
            off[static_cast<size_t>(f)] = o;
            for (size_t k = strides.size(); k-- > 0;) {
                if (++multi[k] < ds[k]) break;
                multi[k] = 0;
            }
        }
        return off;
    };
    std::vector<Index> koff = offsets(kstr, kdim, dk);
    std::vector<Index> toff = offsets(tstr, tdim, dt);

    MatrixXcd out = MatrixXcd::Zero(dk, dk);
    for (Index i = 0; i < dk; ++i)
        for (Index j = 0; j < dk; ++j) {
            cplx s = 0.0;
            for (Index t = 0; t < dt; ++t)
                s += m(koff[static_cast<size_t>(i)] + toff[static_cast<size_t>(t)],
                       koff[static_cast<size_t>(j)] + toff[static_cast<size_t>(t)]);
            out(i, j) = s;
        }
    return out;
}

VectorXcd apply_front(const MatrixXcd& op, const VectorXcd& v, Index rest);

MatrixXcd sandwich_front(const MatrixXcd& op, const MatrixXcd& m, Index rest) {
    const Index fin = op.cols();
    const Index fout = op.rows();
    if (fin * rest != m.rows())
        throw DimMismatch("sandwich_front: operator does not match state");
    // (op x I) * m, column by column
    MatrixXcd tmp(fout * rest, m.cols());
    for (Index c = 0; c < m.cols(); ++c) tmp.col(c) = apply_front(op, m.col(c), rest);
    // ... * (op x I)^dagger via adjoint of a second left-application
    MatrixXcd ta = tmp.adjoint();
    MatrixXcd tb(fout * rest, ta.cols());
    for (Index c = 0; c < ta.cols(); ++c) tb.col(c) = apply_front(op, ta.col(c), rest);
    return tb.adjoint();
}

VectorXcd apply_front(const MatrixXcd& op, const VectorXcd& v, Index rest) {
    const Index fin = op.cols();
    const Index fout = op.rows();
    if (fin * rest != v.size()) throw DimMismatch("apply_front: operator does not match vector");
    Eigen::Map<const MatrixXcd> vm(v.data(), rest, fin);
    MatrixXcd res = vm * op.transpose();  // (rest x fout)
    return Eigen::Map<const VectorXcd>(res.data(), fout * rest);
}

MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
    MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

VectorXcd kron_vec(const VectorXcd& a, const VectorXcd& b) {
    VectorXcd out(a.size() * b.size());
    for (Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a[i] * b;
    return out;
}

MatrixXcd orthonormalize_columns(const MatrixXcd& m, double tol) {
    MatrixXcd q(m.rows(), m.cols());
    Index kept = 0;
    for (Index c = 0; c < m.cols(); ++c) {
        VectorXcd v = m.col(c);
        for (Index pass = 0; pass < 2; ++pass)  // twice for numerical stability
            for (Index k = 0; k < kept; ++k) v -= q.col(k).dot(v) * q.col(k);
        double n = v.norm();
        if (n > tol) q.col(kept++) = v / n;
    }
    return q.leftCols(kept);
}

Index gram_rank(const MatrixXd& gram, double rel_tol) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(gram);
    VectorXd vals = solver.eigenvalues().cwiseAbs();
    double top = vals.maxCoeff();
    if (top <= 0.0) return 0;
    Index r = 0;
    for (Index i = 0; i < vals.size(); ++i)
        if (vals[i] > rel_tol * top) ++r;
    return r;
}

}  // namespace qki::la
