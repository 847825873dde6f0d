#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "qki/dims.hpp"
#include "qki/errors.hpp"

namespace qki::la {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using cplx = std::complex<double>;

inline constexpr double kHermTol = 1e-10;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kEigZero = 1e-12;   // eigenvalues below this carry no entropy
inline constexpr double kSuppTol = 1e-10;   // support cutoff for rank decisions

// Eigenvalues in [-kPsdTol, 0) are rounding noise and clamp to zero; anything
// more negative is a positivity violation.
double clamp_eig(double lambda);

struct HermEig {
    VectorXd vals;   // ascending
    MatrixXcd vecs;  // columns
};
HermEig eig_herm(const MatrixXcd& m);

MatrixXcd sqrt_psd(const MatrixXcd& m);
MatrixXcd inv_sqrt_psd(const MatrixXcd& m, double cutoff = kSuppTol);

double hermiticity_error(const MatrixXcd& m);
MatrixXcd hermitize(const MatrixXcd& m);

// Flat-index map realizing a reordering of tensor slots: for each flat index
// of `to`, the corresponding flat index of `from`. `to` must hold the same
// labels/dims as `from`.
std::vector<Index> permutation_map(const SystemDims& from, const SystemDims& to);

MatrixXcd permute_matrix(const SystemDims& from, const MatrixXcd& m, const SystemDims& to);
VectorXcd permute_vector(const SystemDims& from, const VectorXcd& v, const SystemDims& to);

// Partial trace of `m` over the complement of `keep` (slot positions into
// `dims`, in original order).
MatrixXcd partial_trace_raw(const SystemDims& dims, const MatrixXcd& m,
                            const std::vector<std::string>& keep);

// (op x I) * m * (op x I)^dagger where op acts on the leading `in_front`
// dimensions of the tensor space (m is square of size in_front * rest).
MatrixXcd sandwich_front(const MatrixXcd& op, const MatrixXcd& m, Index rest);

// (op x I) * v with op on the leading block.
VectorXcd apply_front(const MatrixXcd& op, const VectorXcd& v, Index rest);

MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b);
VectorXcd kron_vec(const VectorXcd& a, const VectorXcd& b);

// Modified Gram-Schmidt on columns. Columns whose residual norm falls below
// `tol` are dropped.
MatrixXcd orthonormalize_columns(const MatrixXcd& m, double tol = 1e-12);

// Rank of a Hermitian PSD Gram matrix relative to its largest eigenvalue.
Index gram_rank(const MatrixXd& gram, double rel_tol);

}  // namespace qki::la
