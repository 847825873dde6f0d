#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "qki/entropy.hpp"
#include "qki/errors.hpp"
#include "qki/sim.hpp"
#include "qki/state.hpp"
#include "sim_detail.hpp"

namespace qki {

namespace {

std::string numbered(const std::string& base, Index copy) {
    return base + std::to_string(copy + 1);
}

// Labels of n copies, each suffixed with its copy number: {C,Q} -> C1,Q1,C2,Q2,...
SystemDims copies_dims(const SystemDims& dims, Index n) {
    std::vector<LabeledDim> out;
    for (Index k = 0; k < n; ++k)
        for (const auto& e : dims.entries()) out.push_back({numbered(e.label, k), e.dim});
    return SystemDims(out);
}

// Orthonormal single-copy basis ordered so that column i carries weight i of
// the source spectrum (zeros included, so the columns span everything).
struct CopyBasis {
    MatrixXcd vecs;
    std::vector<double> weights;
};

CopyBasis plain_copy_basis(const MultipartiteState& rho) {
    detail::Spectrum spec = detail::sorted_spectrum(rho.matrix());
    CopyBasis b;
    b.vecs = spec.vecs;
    b.weights.assign(spec.vals.data(), spec.vals.data() + spec.vals.size());
    return b;
}

// Basis of the padded CQ register: within sector j the eigenvectors of
// rho_j^Q weighted by p_j, then the unused padding coordinates at weight 0.
CopyBasis padded_cq_basis(const KIDecomposition& ki) {
    const Index c = ki.c_dim();
    const Index qm = ki.q_max();
    const Index d = c * qm;
    CopyBasis b;
    b.vecs = MatrixXcd::Zero(d, d);
    b.weights.assign(static_cast<size_t>(d), 0.0);
    Index col = 0;
    for (Index j = 0; j < c; ++j) {
        const auto& blk = ki.blocks[static_cast<size_t>(j)];
        MultipartiteState rho_q = partial_trace(blk.rho_qr, {"Q"});
        detail::Spectrum spec = detail::sorted_spectrum(rho_q.matrix());
        for (Index t = 0; t < blk.q_dim; ++t, ++col) {
            b.vecs.block(j * qm, col, blk.q_dim, 1) = spec.vecs.col(t);
            b.weights[static_cast<size_t>(col)] = blk.p * spec.vals(t);
        }
        for (Index t = blk.q_dim; t < qm; ++t, ++col) b.vecs(j * qm + t, col) = 1.0;
    }
    return b;
}

VectorXcd word_vector(const CopyBasis& basis, const std::vector<Index>& word) {
    VectorXcd v = VectorXcd::Ones(1);
    for (Index x : word) v = la::kron_vec(v, basis.vecs.col(x));
    return v;
}

struct TopCode {
    std::vector<EigenWord> words;  // full list, weight descending
    Index keep = 0;
    double mass = 0.0;
};

TopCode top_code(const CopyBasis& basis, Index n, double rate) {
    TopCode tc;
    tc.words = detail::all_words(basis.weights, n);
    detail::sort_words(tc.words);
    tc.keep = detail::keep_count(n, rate, static_cast<Index>(tc.words.size()));
    for (Index i = 0; i < tc.keep; ++i) tc.mass += tc.words[static_cast<size_t>(i)].weight;
    return tc;
}

// Encoder Kraus family of a compress-and-complete code: the isometric part
// maps retained basis words onto M, everything dropped is rerouted to the
// top word's M coordinate.
std::vector<MatrixXcd> completion_kraus(const CopyBasis& basis, const TopCode& tc) {
    const Index total = static_cast<Index>(tc.words.size());
    MatrixXcd enc0(tc.keep, word_vector(basis, tc.words[0].word).size());
    for (Index i = 0; i < tc.keep; ++i)
        enc0.row(i) = word_vector(basis, tc.words[static_cast<size_t>(i)].word).adjoint();
    std::vector<MatrixXcd> kraus;
    kraus.push_back(enc0);
    for (Index e = tc.keep; e < total; ++e) {
        MatrixXcd k = MatrixXcd::Zero(tc.keep, enc0.cols());
        k.row(0) = word_vector(basis, tc.words[static_cast<size_t>(e)].word).adjoint();
        kraus.push_back(std::move(k));
    }
    return kraus;
}

MatrixXcd embed_kraus(const CopyBasis& basis, const TopCode& tc) {
    Index dim = word_vector(basis, tc.words[0].word).size();
    MatrixXcd v(dim, tc.keep);
    for (Index i = 0; i < tc.keep; ++i)
        v.col(i) = word_vector(basis, tc.words[static_cast<size_t>(i)].word);
    return v;
}

}  // namespace

CodeInstance schumacher_code(const MultipartiteState& rho, Index n, double rate_q) {
    if (n < 1) throw Error("copy count must be positive");
    if (rate_q < 0.0) throw Error("rate must be nonnegative");
    rho.validate_full();
    const Index d = rho.total_dim();
    double total = std::pow(static_cast<double>(d), static_cast<double>(n));
    if (total > 256.0)
        throw DimTooLarge("dense code on " + std::to_string(total) + " dimensions (cap 256)");

    CopyBasis basis = plain_copy_basis(rho);
    TopCode tc = top_code(basis, n, rate_q);

    SystemDims in = copies_dims(rho.dims(), n);
    SystemDims msg{{"M", tc.keep}};
    return CodeInstance{n,
                        CodeMode::unassisted,
                        std::log2(static_cast<double>(tc.keep)),
                        0.0,
                        QuantumChannel(in, msg, completion_kraus(basis, tc)),
                        QuantumChannel(msg, in, {embed_kraus(basis, tc)})};
}

SchumacherSummary schumacher_fidelity(const MultipartiteState& rho, Index n, double rate_q) {
    if (n < 1) throw Error("copy count must be positive");
    if (rate_q < 0.0) throw Error("rate must be nonnegative");
    rho.validate_full();
    const Index d = rho.total_dim();
    detail::require_dense_bits(static_cast<double>(n) * std::log2(static_cast<double>(d)),
                               "closed-form code fidelity");

    detail::Spectrum spec = detail::sorted_spectrum(rho.matrix());
    std::vector<double> weights(spec.vals.data(), spec.vals.data() + spec.rank);
    std::vector<EigenWord> words = detail::all_words(weights, n);
    detail::sort_words(words);

    Index full = 1;
    for (Index k = 0; k < n; ++k) full *= d;
    SchumacherSummary out;
    out.dim_m = detail::keep_count(n, rate_q, full);

    // Input and coded output are both diagonal in the product eigenbasis:
    // retained weights survive untouched and the dropped mass piles onto the
    // top word, so the fidelity is a sum of geometric means of eigenvalues.
    Index kept = std::min<Index>(out.dim_m, static_cast<Index>(words.size()));
    for (Index i = 0; i < kept; ++i) out.mass += words[static_cast<size_t>(i)].weight;
    double top = words[0].weight;
    out.fidelity = (out.mass - top) + std::sqrt(top * (top + 1.0 - out.mass));
    return out;
}

QuantumChannel reconstruct_n_channel(const KIDecomposition& ki) {
    const Index c = ki.c_dim();
    const Index qm = ki.q_max();
    const Index nm = ki.n_max();
    std::vector<MatrixXcd> kraus;
    for (Index j = 0; j < c; ++j) {
        const auto& blk = ki.blocks[static_cast<size_t>(j)];
        detail::Spectrum spec = detail::sorted_spectrum(blk.omega.matrix());
        // renormalizing the clipped spectrum keeps the Kraus sum exactly
        // trace preserving
        double norm = 0.0;
        for (Index t = 0; t < spec.rank; ++t) norm += spec.vals(t);
        for (Index t = 0; t < spec.rank; ++t) {
            MatrixXcd k = MatrixXcd::Zero(c * qm * nm, c * qm);
            double amp = std::sqrt(spec.vals(t) / norm);
            for (Index q = 0; q < qm; ++q)
                for (Index m = 0; m < blk.n_dim; ++m)
                    k((j * qm + q) * nm + m, j * qm + q) = amp * spec.vecs(m, t);
            kraus.push_back(std::move(k));
        }
    }
    SystemDims in{{"C", c}, {"Q", qm}};
    SystemDims out{{"C", c}, {"Q", qm}, {"N", nm}};
    return QuantumChannel(in, out, std::move(kraus));
}

QuantumChannel reversal_channel(const KIDecomposition& ki) {
    const Index cqn = ki.u_ki.rows();
    const Index da = ki.dim_a;
    std::vector<MatrixXcd> kraus;
    kraus.push_back(ki.u_ki.adjoint());

    la::HermEig supp = la::eig_herm(ki.support_proj);
    std::vector<Index> supp_cols;
    for (Index i = 0; i < supp.vals.size(); ++i)
        if (supp.vals(i) > 0.5) supp_cols.push_back(i);
    la::HermEig comp = la::eig_herm(MatrixXcd::Identity(cqn, cqn) -
                                    ki.u_ki * ki.u_ki.adjoint());
    double amp = 1.0 / std::sqrt(static_cast<double>(supp_cols.size()));
    for (Index i = 0; i < comp.vals.size(); ++i) {
        if (comp.vals(i) < 0.5) continue;
        for (Index a : supp_cols)
            kraus.push_back(amp * supp.vecs.col(a) * comp.vecs.col(i).adjoint());
    }
    SystemDims in{{"C", ki.c_dim()}, {"Q", ki.q_max()}, {"N", ki.n_max()}};
    SystemDims out{{"A", da}};
    return QuantumChannel(in, out, std::move(kraus));
}

CodeInstance protocol_code(const KIDecomposition& ki, Index n, double rate_q) {
    if (n < 1) throw Error("copy count must be positive");
    if (rate_q < 0.0) throw Error("rate must be nonnegative");
    const Index c = ki.c_dim();
    const Index qm = ki.q_max();
    const Index nm = ki.n_max();
    const Index dim_cq = c * qm;
    double total = std::pow(static_cast<double>(dim_cq), static_cast<double>(n));
    if (total > 512.0)
        throw DimTooLarge("dense pipeline code on " + std::to_string(total) +
                          " dimensions (cap 512)");

    CopyBasis basis = padded_cq_basis(ki);
    TopCode tc = top_code(basis, n, rate_q);
    Index drop = static_cast<Index>(tc.words.size()) - tc.keep;

    QuantumChannel recon = reconstruct_n_channel(ki);
    double n_words = std::pow(static_cast<double>(nm), static_cast<double>(n));
    double enc_count = n_words * static_cast<double>(1 + drop);
    double dec_count = std::pow(static_cast<double>(recon.kraus().size()),
                                static_cast<double>(n));
    if (enc_count > 4096.0 || dec_count > 4096.0)
        throw DimTooLarge("pipeline code needs " + std::to_string(std::max(enc_count, dec_count)) +
                          " Kraus operators (cap 4096)");

    // Partial trace of N as Kraus operators <m| per copy, kron powered.
    std::vector<MatrixXcd> strip_n;
    {
        std::vector<MatrixXcd> per_copy;
        for (Index m = 0; m < nm; ++m) {
            MatrixXcd t = MatrixXcd::Zero(dim_cq, dim_cq * nm);
            for (Index x = 0; x < dim_cq; ++x) t(x, x * nm + m) = 1.0;
            per_copy.push_back(std::move(t));
        }
        std::vector<MatrixXcd> acc{MatrixXcd::Identity(1, 1)};
        for (Index k = 0; k < n; ++k) {
            std::vector<MatrixXcd> next;
            for (const auto& a : acc)
                for (const auto& t : per_copy) next.push_back(la::kron(a, t));
            acc = std::move(next);
        }
        strip_n = std::move(acc);
    }

    std::vector<MatrixXcd> comp = completion_kraus(basis, tc);
    std::vector<MatrixXcd> enc_kraus;
    for (const auto& t : strip_n)
        for (const auto& k : comp) enc_kraus.push_back(k * t);

    // Kron the reconstruction across copies, then compose with the embedding.
    MatrixXcd embed = embed_kraus(basis, tc);
    std::vector<MatrixXcd> dec_kraus;
    {
        std::vector<MatrixXcd> acc{MatrixXcd::Identity(1, 1)};
        for (Index k = 0; k < n; ++k) {
            std::vector<MatrixXcd> next;
            for (const auto& a : acc)
                for (const auto& r : recon.kraus()) next.push_back(la::kron(a, r));
            acc = std::move(next);
        }
        for (const auto& r : acc) dec_kraus.push_back(r * embed);
    }

    SystemDims per_copy = copies_dims(SystemDims{{"C", c}, {"Q", qm}, {"N", nm}}, n);
    SystemDims msg{{"M", tc.keep}};
    return CodeInstance{n,
                        CodeMode::unassisted,
                        std::log2(static_cast<double>(tc.keep)),
                        0.0,
                        QuantumChannel(per_copy, msg, std::move(enc_kraus)),
                        QuantumChannel(msg, per_copy, std::move(dec_kraus))};
}

double code_fidelity(const CodeInstance& code, const KIDecomposition& ki) {
    const Index n = code.n;
    MultipartiteState rho = reconstruct(ki);
    const Index cqnr = ki.u_ki.rows() * ki.dim_r;
    detail::require_dense_bits(static_cast<double>(n) * std::log2(static_cast<double>(cqnr)),
                               "dense pipeline fidelity");

    MatrixXcd m = MatrixXcd::Identity(1, 1);
    for (Index k = 0; k < n; ++k) m = la::kron(m, rho.matrix());
    MultipartiteState state(copies_dims(rho.dims(), n), m);
    MultipartiteState source = state;

    IsometryMap u({{"A", ki.dim_a}}, ki.cqn_dims(), ki.u_ki);
    QuantumChannel rev = reversal_channel(ki);
    for (Index k = 0; k < n; ++k)
        state = apply(u.with_labels({numbered("A", k)},
                                    {numbered("C", k), numbered("Q", k), numbered("N", k)}),
                      state);
    state = apply(code.encoder, state);
    state = apply(code.decoder, state);
    for (Index k = 0; k < n; ++k)
        state = apply(rev.with_labels({numbered("C", k), numbered("Q", k), numbered("N", k)},
                                      {numbered("A", k)}),
                      state);
    return fidelity(source, state);
}

}  // namespace qki
