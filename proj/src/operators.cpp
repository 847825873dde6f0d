#include "qki/operators.hpp"

#include <algorithm>
#include <cmath>

#include "qki/errors.hpp"

namespace qki {

namespace {

constexpr double kIsoTol = 1e-10;
constexpr double kTpTol = 1e-10;

SystemDims relabel(const SystemDims& dims, const std::vector<std::string>& labels) {
    if (static_cast<Index>(labels.size()) != dims.count())
        throw DimMismatch("relabel: wrong number of labels");
    std::vector<LabeledDim> out;
    for (Index k = 0; k < dims.count(); ++k) out.push_back({labels[static_cast<size_t>(k)], dims.at(k).dim});
    return SystemDims(out);
}

// Shared implementation of the label plumbing around a sandwich. `kraus` has
// one entry for an isometry.
MultipartiteState apply_kraus(const SystemDims& in_dims, const SystemDims& out_dims,
                              const std::vector<MatrixXcd>& kraus, const MultipartiteState& s,
                              const std::vector<std::string>& on) {
    SystemDims on_dims = s.dims().subset_as_given(on);
    for (Index k = 0; k < on_dims.count(); ++k)
        if (on_dims.at(k).dim != in_dims.at(k).dim)
            throw DimMismatch("apply: state label '" + on_dims.at(k).label +
                              "' has dim " + std::to_string(on_dims.at(k).dim) +
                              ", operator expects " + std::to_string(in_dims.at(k).dim));
    SystemDims rest = s.dims().complement(on);
    for (const auto& e : out_dims.entries())
        if (rest.has(e.label))
            throw DuplicateLabel("apply: output label '" + e.label + "' already present");

    SystemDims work = on_dims.concat(rest);
    MatrixXcd m = la::permute_matrix(s.dims(), s.matrix(), work);
    MatrixXcd acc = MatrixXcd::Zero(out_dims.total() * rest.total(),
                                    out_dims.total() * rest.total());
    for (const auto& k : kraus) acc += la::sandwich_front(k, m, rest.total());

    SystemDims mid = out_dims.concat(rest);
    Index insert_at = s.dims().position(on.front());
    std::vector<LabeledDim> fin;
    for (Index k = 0; k < s.dims().count(); ++k) {
        if (k == insert_at)
            for (const auto& e : out_dims.entries()) fin.push_back(e);
        const auto& cur = s.dims().at(k);
        if (std::find(on.begin(), on.end(), cur.label) == on.end()) fin.push_back(cur);
    }
    SystemDims final_dims{fin};
    return MultipartiteState::unchecked(final_dims, la::permute_matrix(mid, acc, final_dims));
}

}  // namespace

IsometryMap::IsometryMap(SystemDims in_dims, SystemDims out_dims, MatrixXcd u)
    : in_(std::move(in_dims)), out_(std::move(out_dims)), u_(std::move(u)) {
    if (u_.rows() != out_.total() || u_.cols() != in_.total())
        throw DimMismatch("IsometryMap: matrix shape does not match dims");
    MatrixXcd g = u_.adjoint() * u_ - MatrixXcd::Identity(in_.total(), in_.total());
    double err = g.cwiseAbs().maxCoeff();
    if (err > kIsoTol)
        throw InvariantViolation("isometry: U^dagger U deviates from identity by " +
                                 std::to_string(err));
}

IsometryMap IsometryMap::with_labels(const std::vector<std::string>& in_labels,
                                     const std::vector<std::string>& out_labels) const {
    return IsometryMap(relabel(in_, in_labels), relabel(out_, out_labels), u_);
}

QuantumChannel::QuantumChannel(SystemDims in_dims, SystemDims out_dims,
                               std::vector<MatrixXcd> kraus)
    : in_(std::move(in_dims)), out_(std::move(out_dims)), kraus_(std::move(kraus)) {
    if (kraus_.empty()) throw InvariantViolation("channel: no Kraus operators");
    MatrixXcd sum = MatrixXcd::Zero(in_.total(), in_.total());
    for (const auto& k : kraus_) {
        if (k.rows() != out_.total() || k.cols() != in_.total())
            throw DimMismatch("QuantumChannel: Kraus shape does not match dims");
        sum += k.adjoint() * k;
    }
    double err = (sum - MatrixXcd::Identity(in_.total(), in_.total())).cwiseAbs().maxCoeff();
    if (err > kTpTol)
        throw InvariantViolation("channel: sum K^dagger K deviates from identity by " +
                                 std::to_string(err));
}

QuantumChannel QuantumChannel::with_labels(const std::vector<std::string>& in_labels,
                                           const std::vector<std::string>& out_labels) const {
    return QuantumChannel(relabel(in_, in_labels), relabel(out_, out_labels), kraus_);
}

IsometryMap QuantumChannel::stinespring(const std::string& env_label) const {
    const Index nk = static_cast<Index>(kraus_.size());
    const Index din = in_.total();
    const Index dout = out_.total();
    MatrixXcd u = MatrixXcd::Zero(dout * nk, din);
    // out index (o, k) -> row o*nk + k, so env is the least significant slot
    for (Index k = 0; k < nk; ++k)
        for (Index o = 0; o < dout; ++o)
            u.row(o * nk + k) = kraus_[static_cast<size_t>(k)].row(o);
    SystemDims out_env = out_.concat(SystemDims{{env_label, nk}});
    return IsometryMap(in_, out_env, u);
}

Povm::Povm(Index dim, std::vector<MatrixXcd> elements)
    : dim_(dim), elements_(std::move(elements)) {
    if (elements_.empty()) throw InvariantViolation("povm: no elements");
    MatrixXcd sum = MatrixXcd::Zero(dim_, dim_);
    for (const auto& e : elements_) {
        if (e.rows() != dim_ || e.cols() != dim_) throw DimMismatch("povm: element shape");
        if (la::hermiticity_error(e) > la::kHermTol)
            throw InvariantViolation("povm: element not Hermitian");
        la::HermEig eig = la::eig_herm(e);
        if (eig.vals.minCoeff() < -la::kPsdTol)
            throw InvariantViolation("povm: element not PSD, min eig " +
                                     std::to_string(eig.vals.minCoeff()));
        sum += e;
    }
    double err = (sum - MatrixXcd::Identity(dim_, dim_)).cwiseAbs().maxCoeff();
    if (err > kTpTol)
        throw InvariantViolation("povm: elements sum deviates from identity by " +
                                 std::to_string(err));
}

MultipartiteState apply(const IsometryMap& m, const MultipartiteState& s,
                        const std::vector<std::string>& on) {
    return apply_kraus(m.in_dims(), m.out_dims(), {m.matrix()}, s, on);
}

MultipartiteState apply(const QuantumChannel& m, const MultipartiteState& s,
                        const std::vector<std::string>& on) {
    return apply_kraus(m.in_dims(), m.out_dims(), m.kraus(), s, on);
}

StateVector apply(const IsometryMap& m, const StateVector& s,
                  const std::vector<std::string>& on) {
    return s.applied(m.matrix(), on, m.out_dims());
}

MultipartiteState apply(const IsometryMap& m, const MultipartiteState& s) {
    return apply(m, s, m.in_dims().labels());
}

MultipartiteState apply(const QuantumChannel& m, const MultipartiteState& s) {
    return apply(m, s, m.in_dims().labels());
}

StateVector apply(const IsometryMap& m, const StateVector& s) {
    return apply(m, s, m.in_dims().labels());
}

}  // namespace qki
