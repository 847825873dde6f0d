#include <algorithm>
#include <cmath>
#include <sstream>

#include "qki/entropy.hpp"
#include "qki/errors.hpp"
#include "qki/sim.hpp"
#include "sim_detail.hpp"

namespace qki {

namespace detail {

Spectrum sorted_spectrum(const MatrixXcd& m) {
    la::HermEig eig = la::eig_herm(m);
    const Index d = eig.vals.size();
    Spectrum s;
    s.vals.resize(d);
    s.vecs.resize(d, d);
    for (Index i = 0; i < d; ++i) {
        double v = la::clamp_eig(eig.vals(d - 1 - i));
        s.vals(i) = v < la::kEigZero ? 0.0 : v;
        s.vecs.col(i) = eig.vecs.col(d - 1 - i);
    }
    s.rank = 0;
    while (s.rank < d && s.vals(s.rank) > 0.0) ++s.rank;
    return s;
}

std::vector<EigenWord> all_words(const std::vector<double>& weights, Index n) {
    const size_t l = weights.size();
    std::vector<EigenWord> out;
    if (l == 0 || n <= 0) return out;
    double count = std::pow(static_cast<double>(l), static_cast<double>(n));
    if (count > (1 << 20))
        throw DimTooLarge("word enumeration would need " + std::to_string(count) + " entries");
    out.reserve(static_cast<size_t>(count));
    std::vector<Index> word(static_cast<size_t>(n), 0);
    while (true) {
        double w = 1.0;
        for (Index x : word) w *= weights[static_cast<size_t>(x)];
        out.push_back({w, word});
        size_t k = word.size();
        while (k > 0 && static_cast<size_t>(++word[k - 1]) == l) word[--k] = 0;
        if (k == 0) break;
    }
    return out;
}

void sort_words(std::vector<EigenWord>& words) {
    std::sort(words.begin(), words.end(), [](const EigenWord& a, const EigenWord& b) {
        if (a.weight != b.weight) return a.weight > b.weight;
        return a.word < b.word;
    });
}

Index keep_count(Index n, double rate, Index full_dim) {
    double raw = std::exp2(static_cast<double>(n) * rate);
    double capped = std::min(raw, static_cast<double>(full_dim) + 0.5);
    Index keep = static_cast<Index>(std::ceil(capped - 1e-9));
    return std::max<Index>(1, std::min(keep, full_dim));
}

void require_dense_bits(double bits, const char* what) {
    if (bits > kDenseCapBits + 1e-9) {
        std::ostringstream os;
        os << what << " needs a dense dimension of 2^" << bits << " (cap 2^" << kDenseCapBits
           << ")";
        throw DimTooLarge(os.str());
    }
}

}  // namespace detail

TypicalSubspace typical_projector(const MultipartiteState& rho, Index n, double delta) {
    if (n < 1) throw Error("copy count must be positive");
    if (delta < 0.0) throw Error("typicality width must be nonnegative");
    rho.validate_full();
    const Index d = rho.total_dim();
    detail::require_dense_bits(static_cast<double>(n) * std::log2(static_cast<double>(d)),
                               "typical projector");

    detail::Spectrum spec = detail::sorted_spectrum(rho.matrix());
    TypicalSubspace ts;
    ts.dim = d;
    ts.n = n;
    ts.evals = spec.vals;
    ts.basis = spec.vecs;

    const double s = entropy_bits_spectrum(spec.vals);
    std::vector<double> weights(spec.vals.data(), spec.vals.data() + spec.rank);
    std::vector<double> logs(weights.size());
    for (size_t i = 0; i < weights.size(); ++i) logs[i] = std::log2(weights[i]);

    std::vector<EigenWord> words = detail::all_words(weights, n);
    ts.mass = 0.0;
    for (auto& w : words) {
        double log_p = 0.0;
        for (Index x : w.word) log_p += logs[static_cast<size_t>(x)];
        if (std::abs(-log_p / static_cast<double>(n) - s) <= delta) {
            ts.mass += w.weight;
            ts.retained.push_back(std::move(w));
        }
    }
    detail::sort_words(ts.retained);
    return ts;
}

MatrixXcd TypicalSubspace::projector() const {
    double full = std::pow(static_cast<double>(dim), static_cast<double>(n));
    if (full > 4096.0)
        throw DimTooLarge("dense typical projector would be " + std::to_string(full) +
                          " dimensional");
    const Index total = static_cast<Index>(full + 0.5);
    MatrixXcd b(total, rank());
    for (Index c = 0; c < rank(); ++c) {
        VectorXcd v = VectorXcd::Ones(1);
        for (Index x : retained[static_cast<size_t>(c)].word) v = la::kron_vec(v, basis.col(x));
        b.col(c) = v;
    }
    return b * b.adjoint();
}

}  // namespace qki
