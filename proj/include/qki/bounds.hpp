#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qki/ki.hpp"
#include "qki/random.hpp"

namespace qki {

// Feasibility cap for the variational search: padded C*Q*N dimension.
inline constexpr Index kBoundsCqnCap = 8;

// Isometry ansatz U: {C, Q, N} -> {C, Q, N, E}, E appended least significant.
// `u` has shape (dim_c*dim_q*dim_n*dim_e) x (dim_c*dim_q*dim_n).
struct IsometryAnsatz {
    Index dim_c = 0;
    Index dim_q = 0;
    Index dim_n = 0;
    Index dim_e = 0;
    la::MatrixXcd u;

    Index in_dim() const { return dim_c * dim_q * dim_n; }
    Index out_dim() const { return in_dim() * dim_e; }

    // Checks shape and U^dag U = 1 within tol.
    void validate(double tol = 1e-9) const;
};

// Environment dimension used by default: min((c*q*n)^2, 64).
Index default_env_dim(const KIDecomposition& ki);

// U = 1_{CQN} tensor |0><0 of E|: exact fidelity 1.
IsometryAnsatz identity_ansatz(const KIDecomposition& ki, Index dim_e);

// Identity on C and Q, an independent random unitary commuting with each
// block's redundant-part state on N, pads fixed; still exact fidelity 1.
IsometryAnsatz block_ansatz(const KIDecomposition& ki, Index dim_e, Rng& rng);

// Haar-random isometry; generically infeasible at small epsilon.
IsometryAnsatz random_ansatz(const KIDecomposition& ki, Index dim_e, Rng& rng);

enum class BoundKind { J, Z };

struct ObjectiveValue {
    double value = 0.0;
    double fidelity = 0.0;
};

// Evaluates the chosen functional and the source fidelity at ansatz `u`.
// J: I(NE : CQ | Cp) of the extended state; Z: S(NE | Cp).
ObjectiveValue objective(const IsometryAnsatz& u, const KIDecomposition& ki, BoundKind which);

struct BoundBudget {
    Index restarts = 6;
    Index iterations = 40;
};

struct BoundEstimate {
    double epsilon = 0.0;
    double achieved_fidelity = 0.0;
    double j_value = 0.0;
    double z_value = 0.0;
    BoundKind kind = BoundKind::J;
    IsometryAnsatz ansatz;
    Index restarts_used = 0;

    double value() const { return kind == BoundKind::J ? j_value : z_value; }
    bool feasible() const { return achieved_fidelity >= 1.0 - epsilon - 1e-9; }
};

// Penalized evolutionary search for a feasible ansatz maximizing the chosen
// functional subject to fidelity >= 1 - epsilon. Deterministic per seed.
BoundEstimate estimate(const KIDecomposition& ki, double epsilon, BoundKind which,
                       const BoundBudget& budget, std::uint64_t seed);

// One estimate per epsilon, warm-starting each from the previous winner so the
// reported values are nondecreasing. Throws Error unless epsilons are sorted.
std::vector<BoundEstimate> envelope(const KIDecomposition& ki, const std::vector<double>& epsilons,
                                    BoundKind which, const BoundBudget& budget, std::uint64_t seed);

// Upper concave majorant of (epsilon, value) evaluated at the input epsilons.
// Diagnostic only; input must be sorted by epsilon.
std::vector<double> upper_concave_envelope(const std::vector<BoundEstimate>& points);

// Tensor product of two decompositions: blocks paired in row-major order,
// registers merged with the left factor most significant.
KIDecomposition tensor_decomposition(const KIDecomposition& a, const KIDecomposition& b);

// Tensor product of two ansatz isometries on the merged registers. The factor
// decompositions fix the per-block repacking of the merged coordinates.
IsometryAnsatz tensor_ansatz(const IsometryAnsatz& ua, const KIDecomposition& a,
                             const IsometryAnsatz& ub, const KIDecomposition& b);

// Feasible point for the product source built from two single-source points:
// values add, fidelities multiply, infidelities combine as 1-(1-e1)(1-e2).
BoundEstimate tensor_feasible(const BoundEstimate& a, const KIDecomposition& ka,
                              const BoundEstimate& b, const KIDecomposition& kb);

// CSV "epsilon,J_lower,Z_lower,fidelity,restarts"; the two envelopes must
// share the same epsilon grid. Fidelity is the smaller of the pair, restarts
// the larger.
std::string bounds_csv(const std::vector<BoundEstimate>& j_env,
                       const std::vector<BoundEstimate>& z_env);

std::string ansatz_to_json(const IsometryAnsatz& a);
IsometryAnsatz ansatz_from_json(const std::string& text);

}  // namespace qki
