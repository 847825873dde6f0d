#pragma once

#include <string>
#include <vector>

#include "qki/state.hpp"

namespace qki {

// All entropies are in bits (base-2 logs). Eigenvalues below 1e-12
// contribute zero.
double entropy_bits(const MultipartiteState& s);
double entropy_bits_spectrum(const la::VectorXd& probs);

// Entropy of the reduced state on `group`.
double entropy_of(const MultipartiteState& s, const std::vector<std::string>& group);

// S(X|Y) = S(XY) - S(Y)
double conditional_entropy(const MultipartiteState& s, const std::vector<std::string>& x,
                           const std::vector<std::string>& y);

// I(X:Y) = S(X) + S(Y) - S(XY)
double mutual_information(const MultipartiteState& s, const std::vector<std::string>& x,
                          const std::vector<std::string>& y);

// I(X:Y|Z) = S(XZ) + S(YZ) - S(XYZ) - S(Z)
double conditional_mutual_information(const MultipartiteState& s,
                                      const std::vector<std::string>& x,
                                      const std::vector<std::string>& y,
                                      const std::vector<std::string>& z);

// Uhlmann fidelity F = Tr sqrt(sqrt(rho) xi sqrt(rho)). Dims must match as
// multisets of labeled dimensions; xi is permuted to rho's order.
double fidelity(const MultipartiteState& rho, const MultipartiteState& xi);

// Unnormalized-argument variant used by structured simulation internals.
double fidelity_raw(const MatrixXcd& rho, const MatrixXcd& xi);

// (1/2) ||rho - xi||_1
double trace_distance(const MultipartiteState& rho, const MultipartiteState& xi);
double trace_distance_raw(const MatrixXcd& rho, const MatrixXcd& xi);

// Binary entropy h(x) in bits; h(0) = h(1) = 0.
double binary_entropy(double x);

}  // namespace qki
