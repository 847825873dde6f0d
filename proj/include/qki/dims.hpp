#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "qki/errors.hpp"

namespace qki {

using Index = Eigen::Index;

struct LabeledDim {
    std::string label;
    Index dim;
};

// Ordered list of labeled subsystem dimensions. Flat indices are row-major
// over the tensor basis with the first label most significant.
class SystemDims {
public:
    SystemDims() = default;
    SystemDims(std::initializer_list<std::pair<std::string, Index>> entries);
    explicit SystemDims(std::vector<LabeledDim> entries);

    Index total() const { return total_; }
    Index count() const { return static_cast<Index>(entries_.size()); }
    const std::vector<LabeledDim>& entries() const { return entries_; }
    const LabeledDim& at(Index k) const { return entries_[static_cast<size_t>(k)]; }

    bool has(const std::string& label) const;
    Index position(const std::string& label) const;  // throws UnknownLabel
    Index dim_of(const std::string& label) const;    // throws UnknownLabel
    std::vector<std::string> labels() const;

    // Stride of slot k: product of dims of all later slots.
    Index stride(Index k) const { return strides_[static_cast<size_t>(k)]; }

    Index flat(const std::vector<Index>& multi) const;
    std::vector<Index> unflat(Index flat) const;

    // Entries for the given labels, in the order they appear here.
    SystemDims subset_in_order(const std::vector<std::string>& labels) const;
    // Entries for the given labels, in the order given.
    SystemDims subset_as_given(const std::vector<std::string>& labels) const;
    // Entries whose labels are NOT in `labels`, in original order.
    SystemDims complement(const std::vector<std::string>& labels) const;
    // Concatenation; throws DuplicateLabel on collision.
    SystemDims concat(const SystemDims& other) const;

    bool operator==(const SystemDims& other) const;

private:
    void finish();  // validates and computes strides

    std::vector<LabeledDim> entries_;
    std::vector<Index> strides_;
    Index total_ = 1;
};

}  // namespace qki
