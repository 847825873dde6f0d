#include <cmath>
#include <vector>

#include <Eigen/SVD>

#include "qki/errors.hpp"
#include "qki/ki.hpp"

namespace qki {

namespace {

using la::cplx;
using la::MatrixXcd;
using la::MatrixXd;
using la::VectorXcd;
using la::VectorXd;

constexpr double kSpanRelTol = 1e-7;
constexpr double kNoiseCeiling = 1e-4;
constexpr double kCenterDegeneracy = 1e-8;
constexpr double kSpectralGap = 1e-6;
constexpr double kFactorResidual = 1e-8;
constexpr int kMaxRetries = 8;

VectorXcd vec(const MatrixXcd& m) {
    return Eigen::Map<const VectorXcd>(m.data(), m.size());
}

MatrixXcd unvec(const VectorXcd& v, Index d) {
    return Eigen::Map<const MatrixXcd>(v.data(), d, d);
}

// Orthonormal basis of the span of `mats`, extracted in one SVD so that noise
// in near-dependent inputs never cascades into spurious directions the way
// sequential orthogonalization lets it. Directions below rel_tol times the
// leading singular value are treated as numerical zero. JacobiSVD on purpose:
// BDCSVD (Eigen 3.4.0) can return singular vectors that miss the column space
// on wide stacks even though its singular values are right.
std::vector<MatrixXcd> svd_span(const std::vector<MatrixXcd>& mats, Index d,
                                double rel_tol) {
    if (mats.empty()) return {};
    MatrixXcd stack(d * d, static_cast<Index>(mats.size()));
    for (size_t k = 0; k < mats.size(); ++k) stack.col(static_cast<Index>(k)) = vec(mats[k]);
    Eigen::JacobiSVD<MatrixXcd> svd(stack, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) <= 0.0) return {};
    const double cut = sv(0) * rel_tol;
    std::vector<MatrixXcd> out;
    for (Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cut) out.push_back(unvec(svd.matrixU().col(i), d));
    return out;
}

// Real vectorization of a Hermitian matrix; the sqrt(2) weights keep the real
// dot product equal to the Hilbert-Schmidt inner product.
VectorXd herm_vec(const MatrixXcd& m) {
    const Index d = m.rows();
    VectorXd v(d * d);
    Index at = 0;
    for (Index i = 0; i < d; ++i) v(at++) = m(i, i).real();
    const double rt2 = std::sqrt(2.0);
    for (Index i = 0; i < d; ++i)
        for (Index j = i + 1; j < d; ++j) {
            v(at++) = rt2 * m(i, j).real();
            v(at++) = rt2 * m(i, j).imag();
        }
    return v;
}

MatrixXcd herm_unvec(const VectorXd& v, Index d) {
    MatrixXcd m(d, d);
    Index at = 0;
    for (Index i = 0; i < d; ++i) m(i, i) = v(at++);
    const double irt2 = 1.0 / std::sqrt(2.0);
    for (Index i = 0; i < d; ++i)
        for (Index j = i + 1; j < d; ++j) {
            const double re = v(at++) * irt2;
            const double im = v(at++) * irt2;
            m(i, j) = cplx(re, im);
            m(j, i) = cplx(re, -im);
        }
    return m;
}

// Hermitian orthonormal basis of the adjoint-closed span of `mats`. Works in
// the real parametrization of Hermitian matrices, so every returned element
// is exactly Hermitian. When `expected` is nonnegative the top `expected`
// directions are taken outright and the next singular value must sit at the
// noise floor; otherwise the relative cut decides the dimension.
std::vector<MatrixXcd> hermitian_basis(const std::vector<MatrixXcd>& mats, Index d,
                                       Index expected = -1) {
    if (mats.empty()) return {};
    MatrixXd stack(d * d, 2 * static_cast<Index>(mats.size()));
    Index at = 0;
    for (const auto& m : mats) {
        stack.col(at++) = herm_vec((m + m.adjoint()) / 2.0);
        stack.col(at++) = herm_vec((m - m.adjoint()) / (2.0 * cplx(0, 1)));
    }
    Eigen::JacobiSVD<MatrixXd> svd(stack, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) <= 0.0) return {};
    Index keep;
    if (expected >= 0) {
        if (expected > sv.size()) return {};
        if (expected < sv.size() && sv(expected) > sv(0) * kNoiseCeiling) return {};
        if (sv(expected - 1) <= sv(0) * kSpanRelTol * 1e-2) return {};
        keep = expected;
    } else {
        keep = 0;
        const double cut = sv(0) * kSpanRelTol;
        for (Index i = 0; i < sv.size(); ++i)
            if (sv(i) > cut) ++keep;
    }
    std::vector<MatrixXcd> out;
    for (Index i = 0; i < keep; ++i) out.push_back(herm_unvec(svd.matrixU().col(i), d));
    return out;
}

MatrixXcd random_real_combination(const std::vector<MatrixXcd>& basis, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    MatrixXcd out = MatrixXcd::Zero(basis.front().rows(), basis.front().cols());
    for (const auto& b : basis) out += normal(rng) * b;
    return la::hermitize(out);
}

MatrixXcd random_complex_combination(const std::vector<MatrixXcd>& basis, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    MatrixXcd out = MatrixXcd::Zero(basis.front().rows(), basis.front().cols());
    for (const auto& b : basis) out += cplx(normal(rng), normal(rng)) * b;
    return out;
}

// Solutions X (as coefficient columns) of [X, B] = 0 for every B in `mats`,
// with X restricted to span S (columns = vectorized span basis).
MatrixXcd commutant_coefficients(const std::vector<MatrixXcd>& mats, const MatrixXcd& s,
                                 Index d) {
    const Index n = s.cols();
    MatrixXcd m(static_cast<Index>(mats.size()) * d * d, n);
    const MatrixXcd ident = MatrixXcd::Identity(d, d);
    Index row = 0;
    for (const auto& b : mats) {
        MatrixXcd op = la::kron(b.transpose(), ident) - la::kron(ident, b);
        m.middleRows(row, d * d) = op * s;
        row += d * d;
    }
    Eigen::JacobiSVD<MatrixXcd> svd(m, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cut = std::max(1e-9, (sv.size() > 0 ? sv(0) : 0.0) * 1e-8);
    Index rank = 0;
    for (Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cut) ++rank;
    return svd.matrixV().rightCols(n - rank);
}

// Eigenvalue clusters of an ascending spectrum, split where the gap exceeds
// `gap`. Returns [start, stop) pairs.
std::vector<std::pair<Index, Index>> cluster_spectrum(const VectorXd& vals, double gap) {
    std::vector<std::pair<Index, Index>> out;
    Index start = 0;
    for (Index i = 1; i <= vals.size(); ++i) {
        if (i == vals.size() || vals(i) - vals(i - 1) > gap) {
            out.push_back({start, i});
            start = i;
        }
    }
    return out;
}

// Unitary W on a block with algebra basis `alg` (orthonormal, D x D) such
// that W A W' = (Q matrix) x 1_m for every A in the span. Returns empty on a
// failed generic draw; the caller retries with fresh randomness.
MatrixXcd factor_block(const std::vector<MatrixXcd>& alg, Index d, Index m, Rng& rng) {
    const Index bd = d * m;
    if (d == 1) return MatrixXcd::Identity(bd, bd);

    auto herm = hermitian_basis(alg, bd, d * d);
    if (herm.empty()) return {};
    MatrixXcd x = random_real_combination(herm, rng);
    la::HermEig ex = la::eig_herm(x);
    auto clusters = cluster_spectrum(ex.vals, kSpectralGap);
    if (static_cast<Index>(clusters.size()) != d) return {};
    for (const auto& c : clusters)
        if (c.second - c.first != m) return {};

    std::vector<MatrixXcd> eigenspaces;
    for (const auto& c : clusters) eigenspaces.push_back(ex.vecs.middleCols(c.first, c.second - c.first));

    // N-side basis from a generic Hermitian commutant element, diagonalized
    // inside the first eigenspace
    MatrixXcd cc = commutant_coefficients(alg, MatrixXcd::Identity(bd * bd, bd * bd), bd);
    if (cc.cols() != m * m) return {};
    std::vector<MatrixXcd> comm_mats;
    for (Index i = 0; i < cc.cols(); ++i) comm_mats.push_back(unvec(cc.col(i), bd));
    auto comm_herm = hermitian_basis(comm_mats, bd, m * m);
    if (static_cast<Index>(comm_herm.size()) != m * m) return {};
    MatrixXcd y = random_real_combination(comm_herm, rng);
    MatrixXcd y1 = la::hermitize(eigenspaces[0].adjoint() * y * eigenspaces[0]);
    la::HermEig ey = la::eig_herm(y1);
    for (Index i = 1; i < m; ++i)
        if (ey.vals(i) - ey.vals(i - 1) < kSpectralGap) return {};
    MatrixXcd v1 = eigenspaces[0] * ey.vecs;  // columns v_{0,beta}

    // transport the N-basis to the other eigenspaces through a generic
    // algebra element; a shared column scale keeps the phases aligned
    MatrixXcd g = random_complex_combination(alg, rng);
    MatrixXcd cols(bd, bd);
    cols.leftCols(m) = v1;
    for (Index a = 1; a < d; ++a) {
        MatrixXcd proj = eigenspaces[static_cast<size_t>(a)] *
                         eigenspaces[static_cast<size_t>(a)].adjoint();
        MatrixXcd t = proj * g * v1;
        double scale = t.col(0).norm();
        if (scale < 1e-8) return {};
        cols.middleCols(a * m, m) = t / scale;
    }
    MatrixXcd w = cols.adjoint();
    if ((w * w.adjoint() - MatrixXcd::Identity(bd, bd)).cwiseAbs().maxCoeff() > kFactorResidual)
        return {};

    // contract check: every algebra element factors as Q x identity
    for (const auto& a : alg) {
        MatrixXcd t = w * a * w.adjoint();
        MatrixXcd q = MatrixXcd::Zero(d, d);
        for (Index i = 0; i < d; ++i)
            for (Index k = 0; k < d; ++k) {
                cplx acc = 0;
                for (Index b = 0; b < m; ++b) acc += t(i * m + b, k * m + b);
                q(i, k) = acc / static_cast<double>(m);
            }
        MatrixXcd ideal = la::kron(q, MatrixXcd::Identity(m, m));
        if ((t - ideal).cwiseAbs().maxCoeff() > kFactorResidual) return {};
    }
    return w;
}

}  // namespace

MatrixAlgebra generate_algebra(const Ensemble& ensemble) {
    if (ensemble.size() == 0) throw Error("generate_algebra: empty ensemble");
    const Index d0 = ensemble.states.front().rows();
    MatrixXcd avg = MatrixXcd::Zero(d0, d0);
    for (size_t y = 0; y < ensemble.size(); ++y) avg += ensemble.weights[y] * ensemble.states[y];
    avg = la::hermitize(avg);

    la::HermEig eavg = la::eig_herm(avg);
    Index rank = 0;
    for (Index i = 0; i < d0; ++i)
        if (eavg.vals(i) > la::kSuppTol) ++rank;
    if (rank == 0) throw SingularAverage("generate_algebra: ensemble average has empty support");
    MatrixXcd support = eavg.vecs.rightCols(rank);

    MatrixXcd avg_r = la::hermitize(support.adjoint() * avg * support);
    la::HermEig er = la::eig_herm(avg_r);
    if (er.vals.minCoeff() <= 0)
        throw SingularAverage("generate_algebra: restricted average is singular");
    MatrixXcd isqrt = er.vecs * er.vals.cwiseSqrt().cwiseInverse().asDiagonal() * er.vecs.adjoint();
    MatrixXcd inv = er.vecs * er.vals.cwiseInverse().asDiagonal() * er.vecs.adjoint();

    std::vector<MatrixXcd> seeds;
    seeds.push_back(MatrixXcd::Identity(rank, rank));
    for (size_t y = 0; y < ensemble.size(); ++y)
        seeds.push_back(la::hermitize(isqrt * support.adjoint() * ensemble.states[y] * support * isqrt));
    std::vector<MatrixXcd> basis = svd_span(seeds, rank, kSpanRelTol);

    // closure under products, adjoints and the average-state conjugation; the
    // span is re-extracted from the full candidate set each pass, and a pass
    // that does not grow it ends the loop
    const Index max_passes = rank * rank + 4;
    for (Index pass = 0; pass < max_passes; ++pass) {
        std::vector<MatrixXcd> candidates = basis;
        for (const auto& a : basis) {
            candidates.push_back(a.adjoint());
            candidates.push_back(avg_r * a * inv);
        }
        for (const auto& a : basis)
            for (const auto& b : basis) candidates.push_back(a * b);
        std::vector<MatrixXcd> next = svd_span(candidates, rank, kSpanRelTol);
        const bool grown = next.size() > basis.size();
        basis = std::move(next);
        if (!grown) break;
        if (pass == max_passes - 1) throw Error("generate_algebra: closure failed to stabilize");
    }

    MatrixAlgebra out;
    out.ambient_dim = rank;
    out.basis = std::move(basis);
    out.support = support;
    out.closed_product = true;
    out.closed_adjoint = true;
    out.closed_modular = true;
    return out;
}

BlockStructure decompose_algebra(const MatrixAlgebra& alg, Rng& rng) {
    const Index d = alg.ambient_dim;
    const Index n = alg.size();
    if (d == 0 || n == 0) throw Error("decompose_algebra: empty algebra");

    MatrixXcd s(d * d, n);
    for (Index k = 0; k < n; ++k) s.col(k) = vec(alg.basis[static_cast<size_t>(k)]);

    MatrixXcd center_coeff = commutant_coefficients(alg.basis, s, d);
    const Index n_blocks = center_coeff.cols();
    if (n_blocks == 0) throw Error("decompose_algebra: center is empty");

    std::vector<MatrixXcd> center_mats;
    for (Index i = 0; i < n_blocks; ++i) center_mats.push_back(unvec(s * center_coeff.col(i), d));
    auto center_herm = hermitian_basis(center_mats, d, n_blocks);
    if (static_cast<Index>(center_herm.size()) != n_blocks)
        throw Error("decompose_algebra: center is not closed under adjoints");

    // split the space by a generic Hermitian center element; eigenvalues are
    // constant on each block, so exactly n_blocks clusters must appear
    std::vector<std::pair<Index, Index>> clusters;
    la::HermEig ez;
    bool split_ok = false;
    for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
        MatrixXcd z = random_real_combination(center_herm, rng);
        ez = la::eig_herm(z);
        clusters = cluster_spectrum(ez.vals, kCenterDegeneracy);
        if (static_cast<Index>(clusters.size()) == n_blocks) {
            split_ok = true;
            break;
        }
    }
    if (!split_ok)
        throw DegenerateCenterSplit("decompose_algebra: center eigenvalues kept colliding");

    BlockStructure out;
    for (const auto& c : clusters) {
        const Index bd = c.second - c.first;
        MatrixXcd cols = ez.vecs.middleCols(c.first, bd);

        std::vector<MatrixXcd> restricted_mats;
        restricted_mats.reserve(alg.basis.size());
        for (const auto& b : alg.basis) restricted_mats.push_back(cols.adjoint() * b * cols);
        auto restricted = svd_span(restricted_mats, bd, kSpanRelTol);
        const Index span_dim = static_cast<Index>(restricted.size());
        const Index qd = static_cast<Index>(std::llround(std::sqrt(double(span_dim))));
        if (qd * qd != span_dim || bd % qd != 0)
            throw VerificationFailed("decompose_algebra: block span is not a matrix algebra");
        const Index nd = bd / qd;

        MatrixXcd w;
        for (int attempt = 0; attempt < kMaxRetries && w.size() == 0; ++attempt)
            w = factor_block(restricted, qd, nd, rng);
        if (w.size() == 0)
            throw VerificationFailed("decompose_algebra: block factorization did not converge");

        out.blocks.push_back({qd, nd, cols, w});
    }
    return out;
}

BlockStructure decompose_algebra(const MatrixAlgebra& alg, uint64_t seed) {
    Rng rng(seed);
    return decompose_algebra(alg, rng);
}

}  // namespace qki
