#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qki/povm.hpp"
#include "qki/random.hpp"
#include "qki/state.hpp"

namespace qki {

// Ensemble of states on one system, indexed by a measurement outcome.
struct Ensemble {
    std::vector<double> weights;
    std::vector<MatrixXcd> states;

    size_t size() const { return weights.size(); }
};

// q(y) = Tr[rho (1 x M_y)], rho_y = Tr_R[rho (1 x M_y)] / q(y).
// Outcomes with q(y) < 1e-12 are dropped. Input labels must be {A, R}.
Ensemble measure_reference(const MultipartiteState& rho_ar, const Povm& povm);

// *-algebra of matrices given by a Hilbert-Schmidt orthonormal basis.
// `support` is an (original dim x ambient) isometry recording the support
// restriction applied before generating; ambient = support.cols().
struct MatrixAlgebra {
    Index ambient_dim = 0;
    std::vector<MatrixXcd> basis;
    MatrixXcd support;
    bool closed_product = false;
    bool closed_adjoint = false;
    bool closed_modular = false;

    Index size() const { return static_cast<Index>(basis.size()); }
};

// Smallest self-adjoint algebra containing {1} and the rescaled ensemble
// states T_y = avg^{-1/2} rho_y avg^{-1/2}, closed under the conjugation
// X -> avg X avg^{-1}, all restricted to the support of avg = sum q(y) rho_y.
MatrixAlgebra generate_algebra(const Ensemble& ensemble);

// One central block of a decomposed algebra: `basis_cols` spans the block
// inside the ambient space, `w` rotates block coordinates to Q x N (Q most
// significant) so every algebra element becomes (matrix on Q) x 1_N.
struct AlgebraBlock {
    Index q_dim = 0;
    Index n_dim = 0;
    MatrixXcd basis_cols;
    MatrixXcd w;
};

struct BlockStructure {
    std::vector<AlgebraBlock> blocks;
};

// Artin-Wedderburn factorization of a finite-dimensional *-algebra. The
// center is split by a generic Hermitian center element (random combination,
// rng-controlled); colliding center eigenvalues trigger a retry, at most 8,
// then DegenerateCenterSplit.
BlockStructure decompose_algebra(const MatrixAlgebra& alg, Rng& rng);
BlockStructure decompose_algebra(const MatrixAlgebra& alg, uint64_t seed = 0);

struct KIBlock {
    double p = 0.0;
    Index q_dim = 0;
    Index n_dim = 0;
    MultipartiteState omega;   // on {N}
    MultipartiteState rho_qr;  // on {Q, R}
};

// Block-diagonal normal form of a bipartite state: an isometry on the
// support of the A-marginal carrying A into C x Q x N (C most significant),
// under which the state becomes sum_j p_j |j><j| x rho_j^{QR} x omega_j^N.
// Block list is authoritative; the padded C,Q,N form is derived from it.
struct KIDecomposition {
    std::vector<KIBlock> blocks;
    MatrixXcd u_ki;          // (|C||Q||N|) x |A|, U'U = support projector
    MatrixXcd support_proj;  // on A
    Index dim_a = 0;
    Index dim_r = 0;

    Index c_dim() const { return static_cast<Index>(blocks.size()); }
    Index q_max() const;
    Index n_max() const;
    SystemDims cqn_dims() const;   // {C, Q, N}
    SystemDims cqnr_dims() const;  // {C, Q, N, R}

    // Structural invariants that do not need the source state: weights part
    // of a distribution, valid block states, U'U = support projector.
    void validate(double tol = 1e-9) const;  // throws InvariantViolation
};

// Full pipeline: IC measurement of R, algebra closure, block factorization,
// block data extraction, then mandatory verification against rho_ar
// (reconstruction fidelity >= 1-1e-9, I(N:QR|C) <= 1e-8, per-block product
// form within trace distance 1e-8). Throws VerificationFailed otherwise.
// Blocks are sorted by descending (p, q_dim, n_dim).
KIDecomposition ki_decompose(const MultipartiteState& rho_ar, uint64_t seed = 0);
KIDecomposition ki_decompose(const MultipartiteState& rho_ar, const Povm& povm_on_r,
                             uint64_t seed);

// sum_j p_j |j><j|^C x rho_j^{QR} x omega_j^N on the padded {C,Q,N,R} space.
MultipartiteState assemble_omega(const KIDecomposition& ki);

// Pull the assembled block state back through U_KI. Mass outside the image
// of U_KI (none for a valid decomposition) is routed to the maximally mixed
// state on the support of the A-marginal.
MultipartiteState reconstruct(const KIDecomposition& ki);

// Ground-truth instance generator: draws omega_j full rank, rho_j^{QR} with
// an irreducible conditional family on Q_j (resampled up to 16 times, then
// IrreducibilityFailure), assembles the direct sum and hides it behind a
// random unitary on A. Deterministic given seed.
struct BlockSpec {
    double p;
    Index q_dim;
    Index n_dim;
};
std::pair<MultipartiteState, KIDecomposition> synth_ki_state(
    const std::vector<BlockSpec>& spec, Index dim_r, uint64_t seed);

// Classical-quantum source with duplicated block label and purified blocks:
// sum_j p_j |j><j|^C x |psi_j><psi_j|^{QRR'} x |j><j|^{C'} where psi_j
// purifies rho_j^{QR}. Tracing out R'C' recovers the {C,Q,R} marginal of
// assemble_omega.
MultipartiteState build_clean_source(const KIDecomposition& ki);

// JSON round trip. Loading re-validates all structural invariants.
std::string ki_to_json(const KIDecomposition& ki);
KIDecomposition ki_from_json(const std::string& text);
void save_ki(const KIDecomposition& ki, const std::string& path);
KIDecomposition load_ki(const std::string& path);

}  // namespace qki
