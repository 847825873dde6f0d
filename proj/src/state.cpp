#include "qki/state.hpp"

#include <algorithm>
#include <cmath>

#include "qki/errors.hpp"

namespace qki {

MultipartiteState::MultipartiteState(SystemDims dims, MatrixXcd matrix)
    : dims_(std::move(dims)), mat_(std::move(matrix)) {
    if (mat_.rows() != mat_.cols() || mat_.rows() != dims_.total())
        throw DimMismatch("MultipartiteState: matrix is " + std::to_string(mat_.rows()) + "x" +
                          std::to_string(mat_.cols()) + " but dims give " +
                          std::to_string(dims_.total()));
    double herr = la::hermiticity_error(mat_);
    if (herr > la::kHermTol)
        throw InvariantViolation("hermiticity: off by " + std::to_string(herr));
    mat_ = la::hermitize(mat_);
    double terr = std::abs(mat_.trace().real() - 1.0) + std::abs(mat_.trace().imag());
    if (terr > la::kTraceTol) throw InvariantViolation("trace: off by " + std::to_string(terr));
}

MultipartiteState MultipartiteState::unchecked(SystemDims dims, MatrixXcd matrix) {
    MultipartiteState s;
    s.dims_ = std::move(dims);
    s.mat_ = std::move(matrix);
    return s;
}

void MultipartiteState::validate_full(double tol) const {
    if (mat_.rows() != dims_.total()) throw InvariantViolation("dims: matrix size mismatch");
    double herr = la::hermiticity_error(mat_);
    if (herr > la::kHermTol)
        throw InvariantViolation("hermiticity: off by " + std::to_string(herr));
    double terr = std::abs(mat_.trace() - la::cplx(1.0, 0.0));
    if (terr > la::kTraceTol) throw InvariantViolation("trace: off by " + std::to_string(terr));
    la::HermEig e = la::eig_herm(mat_);
    if (e.vals.minCoeff() < -tol)
        throw InvariantViolation("positivity: min eigenvalue " + std::to_string(e.vals.minCoeff()));
}

MultipartiteState MultipartiteState::permuted(const std::vector<std::string>& label_order) const {
    SystemDims to = dims_.subset_as_given(label_order);
    if (to.count() != dims_.count()) throw DimMismatch("permuted: must list every label");
    return MultipartiteState::unchecked(to, la::permute_matrix(dims_, mat_, to));
}

StateVector::StateVector(SystemDims dims, VectorXcd v) : dims_(std::move(dims)), v_(std::move(v)) {
    if (v_.size() != dims_.total()) throw DimMismatch("StateVector: size does not match dims");
}

StateVector StateVector::permuted(const std::vector<std::string>& label_order) const {
    SystemDims to = dims_.subset_as_given(label_order);
    if (to.count() != dims_.count()) throw DimMismatch("permuted: must list every label");
    return StateVector(to, la::permute_vector(dims_, v_, to));
}

StateVector StateVector::applied(const MatrixXcd& op, const std::vector<std::string>& on,
                                 const SystemDims& out_dims) const {
    SystemDims on_dims = dims_.subset_as_given(on);
    if (op.cols() != on_dims.total() || op.rows() != out_dims.total())
        throw DimMismatch("StateVector::applied: operator shape mismatch");
    SystemDims rest = dims_.complement(on);

    // move consumed labels to the front
    SystemDims work = on_dims.concat(rest);
    VectorXcd v = la::permute_vector(dims_, v_, work);
    VectorXcd w = la::apply_front(op, v, rest.total());
    SystemDims mid = out_dims.concat(rest);

    // final order: out block replaces the first consumed label's position
    Index insert_at = dims_.position(on.front());
    std::vector<LabeledDim> fin;
    for (Index k = 0; k < dims_.count(); ++k) {
        if (k == insert_at)
            for (const auto& e : out_dims.entries()) fin.push_back(e);
        const auto& cur = dims_.at(k);
        if (std::find(on.begin(), on.end(), cur.label) == on.end()) fin.push_back(cur);
    }
    SystemDims final_dims{fin};
    return StateVector(final_dims, la::permute_vector(mid, w, final_dims));
}

MultipartiteState StateVector::density() const {
    return MultipartiteState::unchecked(dims_, v_ * v_.adjoint());
}

MultipartiteState StateVector::density_on(const std::vector<std::string>& keep) const {
    SystemDims kd = dims_.subset_in_order(keep);
    SystemDims rest = dims_.complement(keep);
    SystemDims work = kd.concat(rest);
    VectorXcd v = la::permute_vector(dims_, v_, work);
    Eigen::Map<const MatrixXcd> m(v.data(), rest.total(), kd.total());
    // rho(i,j) = sum_r v[i*rest+r] conj(v[j*rest+r])
    MatrixXcd rho = m.transpose() * m.conjugate();
    return MultipartiteState::unchecked(kd, rho);
}

StateVector tensor(const StateVector& a, const StateVector& b) {
    return StateVector(a.dims().concat(b.dims()), la::kron_vec(a.vector(), b.vector()));
}

MultipartiteState tensor(const MultipartiteState& a, const MultipartiteState& b) {
    return MultipartiteState::unchecked(a.dims().concat(b.dims()),
                                        la::kron(a.matrix(), b.matrix()));
}

MultipartiteState partial_trace(const MultipartiteState& s, const std::vector<std::string>& keep) {
    SystemDims kd = s.dims().subset_in_order(keep);
    return MultipartiteState::unchecked(kd, la::partial_trace_raw(s.dims(), s.matrix(), keep));
}

StateVector purify_vector(const MultipartiteState& s, const std::string& new_label) {
    la::HermEig e = la::eig_herm(s.matrix());
    std::vector<Index> kept;
    for (Index i = 0; i < e.vals.size(); ++i)
        if (la::clamp_eig(e.vals[i]) > la::kSuppTol) kept.push_back(i);
    if (kept.empty()) throw InvariantViolation("purify: state has no support");
    const Index r = static_cast<Index>(kept.size());
    const Index d = s.total_dim();
    VectorXcd psi = VectorXcd::Zero(d * r);
    for (Index k = 0; k < r; ++k) {
        double root = std::sqrt(e.vals[kept[static_cast<size_t>(k)]]);
        for (Index i = 0; i < d; ++i)
            psi[i * r + k] = root * e.vecs(i, kept[static_cast<size_t>(k)]);
    }
    SystemDims dims = s.dims().concat(SystemDims{{new_label, r}});
    return StateVector(dims, psi);
}

MultipartiteState purify(const MultipartiteState& s, const std::string& new_label) {
    return purify_vector(s, new_label).density();
}

MultipartiteState merge_labels(const MultipartiteState& s, const std::string& new_label) {
    return MultipartiteState::unchecked(SystemDims{{new_label, s.total_dim()}}, s.matrix());
}

}  // namespace qki
