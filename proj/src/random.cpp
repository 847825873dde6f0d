#include "qki/random.hpp"

#include <cstdlib>
#include <string>

#include "qki/errors.hpp"

namespace qki {

uint64_t default_seed() {
    const char* env = std::getenv("QKI_SEED");
    if (env == nullptr || *env == '\0') return 0;
    return std::strtoull(env, nullptr, 10);
}

la::MatrixXcd random_gaussian(Index rows, Index cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    la::MatrixXcd m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) {
            double re = normal(rng);
            double im = normal(rng);
            m(i, j) = la::cplx(re, im);
        }
    return m;
}

MultipartiteState random_state(const SystemDims& dims, Rng& rng, Index rank) {
    const Index d = dims.total();
    if (rank < 1 || rank > d) throw BadRank("random_state: rank must be in [1, dim]");
    la::MatrixXcd g = random_gaussian(d, rank, rng);
    la::MatrixXcd rho = g * g.adjoint();
    rho /= rho.trace().real();
    return MultipartiteState(dims, rho);
}

MultipartiteState random_state(const SystemDims& dims, Rng& rng) {
    return random_state(dims, rng, dims.total());
}

MultipartiteState random_state(const SystemDims& dims, uint64_t seed, Index rank) {
    Rng rng(seed);
    return random_state(dims, rng, rank);
}

MultipartiteState random_state(const SystemDims& dims, uint64_t seed) {
    Rng rng(seed);
    return random_state(dims, rng, dims.total());
}

la::MatrixXcd random_isometry_matrix(Index in_dim, Index out_dim, Rng& rng) {
    if (out_dim < in_dim) throw DimMismatch("random_isometry: out dim smaller than in dim");
    la::MatrixXcd g = random_gaussian(out_dim, in_dim, rng);
    la::MatrixXcd q = la::orthonormalize_columns(g);
    if (q.cols() != in_dim) throw Error("random_isometry: Gaussian draw was rank deficient");
    return q;
}

IsometryMap random_isometry(const SystemDims& in_dims, const SystemDims& out_dims,
                            uint64_t seed) {
    Rng rng(seed);
    return IsometryMap(in_dims, out_dims,
                       random_isometry_matrix(in_dims.total(), out_dims.total(), rng));
}

la::MatrixXcd random_unitary(Index dim, Rng& rng) {
    return random_isometry_matrix(dim, dim, rng);
}

la::MatrixXcd random_commuting_unitary(const la::MatrixXcd& h, Rng& rng, double degeneracy_tol) {
    la::HermEig e = la::eig_herm(h);
    const Index d = h.rows();
    la::MatrixXcd u = la::MatrixXcd::Zero(d, d);
    Index start = 0;
    while (start < d) {
        Index stop = start + 1;
        while (stop < d && std::abs(e.vals[stop] - e.vals[stop - 1]) <= degeneracy_tol) ++stop;
        const Index b = stop - start;
        la::MatrixXcd ub = random_unitary(b, rng);
        u += e.vecs.middleCols(start, b) * ub * e.vecs.middleCols(start, b).adjoint();
        start = stop;
    }
    return u;
}

}  // namespace qki
