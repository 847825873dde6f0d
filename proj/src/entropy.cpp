#include "qki/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "qki/errors.hpp"

namespace qki {

namespace {

void check_disjoint(std::initializer_list<const std::vector<std::string>*> groups) {
    std::set<std::string> seen;
    for (const auto* g : groups)
        for (const auto& l : *g)
            if (!seen.insert(l).second)
                throw OverlappingGroups("entropic groups share label '" + l + "'");
}

std::vector<std::string> join(const std::vector<std::string>& a,
                              const std::vector<std::string>& b) {
    std::vector<std::string> out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

}  // namespace

double entropy_bits_spectrum(const la::VectorXd& probs) {
    double s = 0.0;
    for (Index i = 0; i < probs.size(); ++i) {
        double p = la::clamp_eig(probs[i]);
        if (p >= la::kEigZero) s -= p * std::log2(p);
    }
    return s;
}

double entropy_bits(const MultipartiteState& s) {
    return entropy_bits_spectrum(la::eig_herm(s.matrix()).vals);
}

double entropy_of(const MultipartiteState& s, const std::vector<std::string>& group) {
    return entropy_bits(partial_trace(s, group));
}

double conditional_entropy(const MultipartiteState& s, const std::vector<std::string>& x,
                           const std::vector<std::string>& y) {
    check_disjoint({&x, &y});
    return entropy_of(s, join(x, y)) - entropy_of(s, y);
}

double mutual_information(const MultipartiteState& s, const std::vector<std::string>& x,
                          const std::vector<std::string>& y) {
    check_disjoint({&x, &y});
    return entropy_of(s, x) + entropy_of(s, y) - entropy_of(s, join(x, y));
}

double conditional_mutual_information(const MultipartiteState& s,
                                      const std::vector<std::string>& x,
                                      const std::vector<std::string>& y,
                                      const std::vector<std::string>& z) {
    check_disjoint({&x, &y, &z});
    return entropy_of(s, join(x, z)) + entropy_of(s, join(y, z)) -
           entropy_of(s, join(join(x, y), z)) - entropy_of(s, z);
}

double fidelity_raw(const MatrixXcd& rho, const MatrixXcd& xi) {
    MatrixXcd root = la::sqrt_psd(rho);
    MatrixXcd inner = root * xi * root;
    la::HermEig e = la::eig_herm(la::hermitize(inner));
    // Zero modes of the sandwich carry eigenvalue noise near machine epsilon;
    // square roots of that noise would bias the sum by ~1e-8 per mode, so
    // anything below the floor is treated as an exact zero.
    constexpr double kSandwichFloor = 1e-14;
    double f = 0.0;
    for (Index i = 0; i < e.vals.size(); ++i) {
        const double v = e.vals[i];
        if (v >= kSandwichFloor) f += std::sqrt(v);
    }
    return f;
}

double fidelity(const MultipartiteState& rho, const MultipartiteState& xi) {
    MatrixXcd x = xi.matrix();
    if (!(xi.dims() == rho.dims()))
        x = la::permute_matrix(xi.dims(), x, rho.dims());  // throws if incompatible
    return fidelity_raw(rho.matrix(), x);
}

double trace_distance_raw(const MatrixXcd& rho, const MatrixXcd& xi) {
    la::HermEig e = la::eig_herm(la::hermitize(rho - xi));
    return 0.5 * e.vals.cwiseAbs().sum();
}

double trace_distance(const MultipartiteState& rho, const MultipartiteState& xi) {
    MatrixXcd x = xi.matrix();
    if (!(xi.dims() == rho.dims())) x = la::permute_matrix(xi.dims(), x, rho.dims());
    return trace_distance_raw(rho.matrix(), x);
}

double binary_entropy(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double StateVector::entropy_on(const std::vector<std::string>& keep) const {
    return entropy_bits(density_on(keep));
}

}  // namespace qki
