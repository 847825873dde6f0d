#pragma once

#include <vector>

#include "qki/linalg.hpp"
#include "qki/sim.hpp"

namespace qki::detail {

// Hermitian spectrum sorted descending with rounding noise clipped to
// exact zero, so product-eigenvector enumerations can stop at `rank`.
struct Spectrum {
    la::VectorXd vals;
    MatrixXcd vecs;  // columns match vals
    Index rank = 0;  // entries >= kEigZero
};
Spectrum sorted_spectrum(const MatrixXcd& m);

// Every length-n word over the given per-copy weights, weight = product.
// Counts entries with weight zero too; callers that only want support
// words pass a trimmed list.
std::vector<EigenWord> all_words(const std::vector<double>& weights, Index n);

// Weight descending, ties broken by lexicographic word order.
void sort_words(std::vector<EigenWord>& words);

// ceil(2^{n rate}) guarded against representation noise, clamped to
// [1, full_dim].
Index keep_count(Index n, double rate, Index full_dim);

void require_dense_bits(double bits, const char* what);

}  // namespace qki::detail
