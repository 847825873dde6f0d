#include "qki/dims.hpp"

#include <algorithm>
#include <set>

namespace qki {

SystemDims::SystemDims(std::initializer_list<std::pair<std::string, Index>> entries) {
    for (const auto& [label, dim] : entries) entries_.push_back({label, dim});
    finish();
}

SystemDims::SystemDims(std::vector<LabeledDim> entries) : entries_(std::move(entries)) {
    finish();
}

void SystemDims::finish() {
    std::set<std::string> seen;
    total_ = 1;
    for (const auto& e : entries_) {
        if (e.label.empty()) throw Error("SystemDims: empty label");
        if (e.dim < 1) throw Error("SystemDims: dim of '" + e.label + "' must be >= 1");
        if (!seen.insert(e.label).second)
            throw DuplicateLabel("SystemDims: duplicate label '" + e.label + "'");
        total_ *= e.dim;
    }
    strides_.assign(entries_.size(), 1);
    for (Index k = count() - 2; k >= 0; --k)
        strides_[static_cast<size_t>(k)] =
            strides_[static_cast<size_t>(k + 1)] * entries_[static_cast<size_t>(k + 1)].dim;
}

bool SystemDims::has(const std::string& label) const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const LabeledDim& e) { return e.label == label; });
}

Index SystemDims::position(const std::string& label) const {
    for (Index k = 0; k < count(); ++k)
        if (entries_[static_cast<size_t>(k)].label == label) return k;
    throw UnknownLabel("SystemDims: no label '" + label + "'");
}

Index SystemDims::dim_of(const std::string& label) const {
    return entries_[static_cast<size_t>(position(label))].dim;
}

std::vector<std::string> SystemDims::labels() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.label);
    return out;
}

Index SystemDims::flat(const std::vector<Index>& multi) const {
    Index f = 0;
    for (Index k = 0; k < count(); ++k) f += multi[static_cast<size_t>(k)] * stride(k);
    return f;
}

std::vector<Index> SystemDims::unflat(Index flat) const {
    std::vector<Index> multi(static_cast<size_t>(count()));
    for (Index k = 0; k < count(); ++k) {
        multi[static_cast<size_t>(k)] = flat / stride(k);
        flat %= stride(k);
    }
    return multi;
}

SystemDims SystemDims::subset_in_order(const std::vector<std::string>& labels) const {
    std::vector<LabeledDim> out;
    for (const auto& e : entries_)
        if (std::find(labels.begin(), labels.end(), e.label) != labels.end()) out.push_back(e);
    if (out.size() != labels.size()) {
        for (const auto& l : labels)
            if (!has(l)) throw UnknownLabel("SystemDims: no label '" + l + "'");
        throw DuplicateLabel("SystemDims: repeated label in selection");
    }
    return SystemDims(out);
}

SystemDims SystemDims::subset_as_given(const std::vector<std::string>& labels) const {
    std::vector<LabeledDim> out;
    for (const auto& l : labels) out.push_back({l, dim_of(l)});
    return SystemDims(out);
}

SystemDims SystemDims::complement(const std::vector<std::string>& labels) const {
    for (const auto& l : labels)
        if (!has(l)) throw UnknownLabel("SystemDims: no label '" + l + "'");
    std::vector<LabeledDim> out;
    for (const auto& e : entries_)
        if (std::find(labels.begin(), labels.end(), e.label) == labels.end()) out.push_back(e);
    return SystemDims(out);
}

SystemDims SystemDims::concat(const SystemDims& other) const {
    std::vector<LabeledDim> out = entries_;
    for (const auto& e : other.entries()) out.push_back(e);
    return SystemDims(out);  // finish() throws DuplicateLabel on collision
}

bool SystemDims::operator==(const SystemDims& other) const {
    if (count() != other.count()) return false;
    for (Index k = 0; k < count(); ++k) {
        const auto& a = entries_[static_cast<size_t>(k)];
        const auto& b = other.entries_[static_cast<size_t>(k)];
        if (a.label != b.label || a.dim != b.dim) return false;
    }
    return true;
}

}  // namespace qki
