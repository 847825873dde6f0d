#pragma once

#include <string>
#include <vector>

#include "qki/state.hpp"

namespace qki {

// Isometry between labeled spaces: matrix is (out_dims.total x in_dims.total)
// with U^dagger U = 1 on the input space.
class IsometryMap {
public:
    IsometryMap(SystemDims in_dims, SystemDims out_dims, MatrixXcd u);

    const SystemDims& in_dims() const { return in_; }
    const SystemDims& out_dims() const { return out_; }
    const MatrixXcd& matrix() const { return u_; }

    IsometryMap with_labels(const std::vector<std::string>& in_labels,
                            const std::vector<std::string>& out_labels) const;

private:
    SystemDims in_, out_;
    MatrixXcd u_;
};

// CPTP map given by Kraus operators; sum_k K^dagger K = 1 on the input space.
class QuantumChannel {
public:
    QuantumChannel(SystemDims in_dims, SystemDims out_dims, std::vector<MatrixXcd> kraus);

    const SystemDims& in_dims() const { return in_; }
    const SystemDims& out_dims() const { return out_; }
    const std::vector<MatrixXcd>& kraus() const { return kraus_; }

    QuantumChannel with_labels(const std::vector<std::string>& in_labels,
                               const std::vector<std::string>& out_labels) const;

    // Stinespring dilation: isometry in -> out x env, env spanned by the
    // Kraus index.
    IsometryMap stinespring(const std::string& env_label) const;

private:
    SystemDims in_, out_;
    std::vector<MatrixXcd> kraus_;
};

// POVM on a single system: elements are PSD and sum to the identity.
class Povm {
public:
    Povm(Index dim, std::vector<MatrixXcd> elements);

    Index dim() const { return dim_; }
    const std::vector<MatrixXcd>& elements() const { return elements_; }
    Index size() const { return static_cast<Index>(elements_.size()); }

private:
    Index dim_;
    std::vector<MatrixXcd> elements_;
};

// Apply to the state labels `on` (order and dims matching m.in_dims); the
// consumed labels are replaced by m's output labels at the position of the
// first consumed label.
MultipartiteState apply(const IsometryMap& m, const MultipartiteState& s,
                        const std::vector<std::string>& on);
MultipartiteState apply(const QuantumChannel& m, const MultipartiteState& s,
                        const std::vector<std::string>& on);
StateVector apply(const IsometryMap& m, const StateVector& s,
                  const std::vector<std::string>& on);

// Shorthands acting on the labels named by m.in_dims.
MultipartiteState apply(const IsometryMap& m, const MultipartiteState& s);
MultipartiteState apply(const QuantumChannel& m, const MultipartiteState& s);
StateVector apply(const IsometryMap& m, const StateVector& s);

}  // namespace qki
