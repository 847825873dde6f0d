#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qki/dims.hpp"
#include "qki/linalg.hpp"

namespace qki {

using la::MatrixXcd;
using la::VectorXcd;
using la::VectorXd;

// Density operator over labeled subsystems. Construction hermitizes and
// checks hermiticity/trace; the eigenvalue (positivity) check is done on
// demand by validate_full(), which file loading and tests call.
class MultipartiteState {
public:
    MultipartiteState(SystemDims dims, MatrixXcd matrix);

    static MultipartiteState unchecked(SystemDims dims, MatrixXcd matrix);

    const SystemDims& dims() const { return dims_; }
    const MatrixXcd& matrix() const { return mat_; }
    Index total_dim() const { return dims_.total(); }

    void validate_full(double tol = la::kPsdTol) const;  // throws InvariantViolation

    MultipartiteState permuted(const std::vector<std::string>& label_order) const;

private:
    MultipartiteState() = default;
    SystemDims dims_;
    MatrixXcd mat_;
};

// Pure state vector over labeled subsystems. Plumbing shared by the
// simulator and audit; density matrices are derived views of it.
class StateVector {
public:
    StateVector(SystemDims dims, VectorXcd v);

    const SystemDims& dims() const { return dims_; }
    const VectorXcd& vector() const { return v_; }

    StateVector permuted(const std::vector<std::string>& label_order) const;

    // Apply `op` (out_dims x in-labels matrix) to `on`; the consumed labels
    // are replaced by out_dims at the position of the first consumed label.
    StateVector applied(const MatrixXcd& op, const std::vector<std::string>& on,
                        const SystemDims& out_dims) const;

    MultipartiteState density() const;
    MultipartiteState density_on(const std::vector<std::string>& keep) const;
    double entropy_on(const std::vector<std::string>& keep) const;

private:
    SystemDims dims_;
    VectorXcd v_;
};

StateVector tensor(const StateVector& a, const StateVector& b);

// --- core state operations ---

MultipartiteState tensor(const MultipartiteState& a, const MultipartiteState& b);
MultipartiteState partial_trace(const MultipartiteState& s, const std::vector<std::string>& keep);

// Purification with purifying dimension = rank of s; new label appended last.
MultipartiteState purify(const MultipartiteState& s, const std::string& new_label);
StateVector purify_vector(const MultipartiteState& s, const std::string& new_label);

// Merge all labels into a single one (same matrix, one slot). Convenience for
// treating a multipartite side as one system.
MultipartiteState merge_labels(const MultipartiteState& s, const std::string& new_label);

}  // namespace qki
