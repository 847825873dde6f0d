#include "qki/povm.hpp"

#include <cmath>

namespace qki {

Povm make_ic_povm(Index dim) {
    using la::cplx;
    using la::MatrixXcd;
    using la::VectorXcd;

    std::vector<VectorXcd> frame;
    for (Index r = 0; r < dim; ++r) {
        VectorXcd v = VectorXcd::Zero(dim);
        v[r] = 1.0;
        frame.push_back(v);
    }
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (Index r = 0; r < dim; ++r)
        for (Index rp = r + 1; rp < dim; ++rp) {
            VectorXcd v = VectorXcd::Zero(dim);
            v[r] = inv_sqrt2;
            v[rp] = inv_sqrt2;
            frame.push_back(v);
            VectorXcd w = VectorXcd::Zero(dim);
            w[r] = inv_sqrt2;
            w[rp] = cplx(0.0, inv_sqrt2);
            frame.push_back(w);
        }
    // d + 2 * d(d-1)/2 = d^2 elements exactly

    MatrixXcd s = MatrixXcd::Zero(dim, dim);
    std::vector<MatrixXcd> raw;
    for (const auto& v : frame) {
        raw.push_back(v * v.adjoint());
        s += raw.back();
    }
    MatrixXcd si = la::inv_sqrt_psd(s);
    std::vector<MatrixXcd> elements;
    for (const auto& e : raw) elements.push_back(la::hermitize(si * e * si));
    return Povm(dim, std::move(elements));
}

Index povm_gram_rank(const Povm& povm, double rel_tol) {
    const Index n = povm.size();
    la::MatrixXd gram(n, n);
    for (Index y = 0; y < n; ++y)
        for (Index z = 0; z < n; ++z)
            gram(y, z) = (povm.elements()[static_cast<size_t>(y)] *
                          povm.elements()[static_cast<size_t>(z)])
                             .trace()
                             .real();
    return la::gram_rank(gram, rel_tol);
}

}  // namespace qki
