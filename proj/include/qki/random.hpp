#pragma once

#include <cstdint>
#include <random>

#include "qki/operators.hpp"
#include "qki/state.hpp"

namespace qki {

using Rng = std::mt19937_64;

// Seed for CLI runs: QKI_SEED environment variable when set, else 0.
uint64_t default_seed();

la::MatrixXcd random_gaussian(Index rows, Index cols, Rng& rng);

// Partial trace of a Haar-random pure state on dims x (rank-dim ancilla).
// Omitting the rank draws a full-rank state.
MultipartiteState random_state(const SystemDims& dims, Rng& rng);
MultipartiteState random_state(const SystemDims& dims, Rng& rng, Index rank);
MultipartiteState random_state(const SystemDims& dims, uint64_t seed);
MultipartiteState random_state(const SystemDims& dims, uint64_t seed, Index rank);

// Column-orthonormalized Gaussian matrix.
IsometryMap random_isometry(const SystemDims& in_dims, const SystemDims& out_dims, uint64_t seed);
la::MatrixXcd random_isometry_matrix(Index in_dim, Index out_dim, Rng& rng);

la::MatrixXcd random_unitary(Index dim, Rng& rng);

// Random unitary commuting with the PSD matrix `h`: a Haar-random unitary on
// each eigenspace of h (eigenvalues grouped within `degeneracy_tol`).
la::MatrixXcd random_commuting_unitary(const la::MatrixXcd& h, Rng& rng,
                                       double degeneracy_tol = 1e-9);

}  // namespace qki
