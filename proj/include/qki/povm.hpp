#pragma once

#include "qki/operators.hpp"

namespace qki {

// Informationally complete POVM with exactly dim^2 rank-1 elements, built
// from the frame {|r><r|} u {|r>+|r'>} u {|r>+i|r'>} renormalized through
// S^{-1/2} E_y S^{-1/2} with S = sum_y E_y.
Povm make_ic_povm(Index dim);

// Rank of the Gram matrix Tr[M_y M_z] relative to its largest eigenvalue.
// Informational completeness means this equals dim^2.
Index povm_gram_rank(const Povm& povm, double rel_tol = 1e-9);

}  // namespace qki
