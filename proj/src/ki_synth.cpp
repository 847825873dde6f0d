#include <algorithm>
#include <cmath>

#include "qki/errors.hpp"
#include "qki/ki.hpp"

namespace qki {

namespace {

constexpr int kMaxResamples = 16;

// Full-rank state on an m-dim system; resampled when an eigenvalue sits too
// close to zero so that synthesized instances stay well-conditioned.
MultipartiteState draw_omega(Index m, Rng& rng) {
    SystemDims dims({{"N", m}});
    for (int t = 0; t < 64; ++t) {
        auto s = random_state(dims, rng);
        if (la::eig_herm(s.matrix()).vals.minCoeff() > 0.02 / static_cast<double>(m)) return s;
    }
    throw Error("synth_ki_state: could not draw a well-conditioned omega");
}

// True when measuring R of `rho_qr` (labels {A,R}) yields a conditional
// family generating the full matrix algebra on the d-dim first factor.
bool family_irreducible(const MultipartiteState& rho_ar, Index d) {
    auto marg = la::partial_trace_raw(rho_ar.dims(), rho_ar.matrix(), {"A"});
    if (la::eig_herm(la::hermitize(marg)).vals.minCoeff() < 1e-8) return false;
    auto povm = make_ic_povm(rho_ar.dims().dim_of("R"));
    auto alg = generate_algebra(measure_reference(rho_ar, povm));
    return alg.ambient_dim == d && alg.size() == d * d;
}

}  // namespace

std::pair<MultipartiteState, KIDecomposition> synth_ki_state(const std::vector<BlockSpec>& spec,
                                                             Index dim_r, uint64_t seed) {
    if (spec.empty()) throw Error("synth_ki_state: empty block list");
    if (dim_r < 1) throw Error("synth_ki_state: dim_R must be at least 1");
    double psum = 0.0;
    for (const auto& b : spec) {
        if (b.p <= 0) throw Error("synth_ki_state: block weights must be positive");
        if (b.q_dim < 1 || b.n_dim < 1) throw Error("synth_ki_state: block dims must be at least 1");
        psum += b.p;
    }
    if (std::abs(psum - 1.0) > 1e-9) throw Error("synth_ki_state: weights must sum to 1");

    std::vector<BlockSpec> ordered = spec;
    std::stable_sort(ordered.begin(), ordered.end(), [](const BlockSpec& a, const BlockSpec& b) {
        if (std::abs(a.p - b.p) > 1e-12) return a.p > b.p;
        if (a.q_dim != b.q_dim) return a.q_dim > b.q_dim;
        return a.n_dim > b.n_dim;
    });

    Rng rng(seed);
    KIDecomposition ki;
    ki.dim_r = dim_r;
    Index da = 0;
    for (const auto& b : ordered) da += b.q_dim * b.n_dim;
    ki.dim_a = da;
    ki.support_proj = MatrixXcd::Identity(da, da);

    for (const auto& b : ordered) {
        auto omega = draw_omega(b.n_dim, rng);
        SystemDims ar({{"A", b.q_dim}, {"R", dim_r}});
        const Index qr_rank = std::max<Index>(
            1, (b.q_dim + dim_r - 1) / dim_r);  // keeps the Q marginal full rank
        MultipartiteState rho_qr = random_state(ar, rng, qr_rank);
        bool found = false;
        for (int t = 0; t < kMaxResamples; ++t) {
            if (family_irreducible(rho_qr, b.q_dim)) {
                found = true;
                break;
            }
            rho_qr = random_state(ar, rng, qr_rank);
        }
        if (!found)
            throw IrreducibilityFailure(
                "synth_ki_state: conditional family on Q stayed reducible; is dim_R large enough?");
        SystemDims qr({{"Q", b.q_dim}, {"R", dim_r}});
        ki.blocks.push_back({b.p, b.q_dim, b.n_dim, omega, MultipartiteState(qr, rho_qr.matrix())});
    }

    // direct sum of p_j * rho_j^{QR} x omega_j laid out block by block in A,
    // then hidden behind a random unitary change of basis on A
    SystemDims ar_dims({{"A", da}, {"R", dim_r}});
    MatrixXcd raw = MatrixXcd::Zero(da * dim_r, da * dim_r);
    Index offset = 0;
    for (const auto& kb : ki.blocks) {
        auto small = tensor(kb.rho_qr, kb.omega).permuted({"Q", "N", "R"});
        const auto& sm = small.matrix();
        const Index bd = kb.q_dim * kb.n_dim;
        for (Index x = 0; x < bd; ++x)
            for (Index rr = 0; rr < dim_r; ++rr)
                for (Index x2 = 0; x2 < bd; ++x2)
                    for (Index r2 = 0; r2 < dim_r; ++r2)
                        raw((offset + x) * dim_r + rr, (offset + x2) * dim_r + r2) +=
                            kb.p * sm(x * dim_r + rr, x2 * dim_r + r2);
        offset += bd;
    }
    MatrixXcd v = random_unitary(da, rng);
    MatrixXcd hidden = la::hermitize(la::sandwich_front(v, raw, dim_r));

    const Index qm = ki.q_max();
    const Index nm = ki.n_max();
    MatrixXcd u = MatrixXcd::Zero(ki.c_dim() * qm * nm, da);
    offset = 0;
    for (Index j = 0; j < ki.c_dim(); ++j) {
        const auto& kb = ki.blocks[static_cast<size_t>(j)];
        for (Index q = 0; q < kb.q_dim; ++q)
            for (Index n = 0; n < kb.n_dim; ++n)
                u.row((j * qm + q) * nm + n) = v.col(offset + q * kb.n_dim + n).adjoint();
        offset += kb.q_dim * kb.n_dim;
    }
    ki.u_ki = u;
    ki.validate(1e-9);
    return {MultipartiteState(ar_dims, hidden), ki};
}

MultipartiteState build_clean_source(const KIDecomposition& ki) {
    const Index c = ki.c_dim();
    const Index qm = ki.q_max();
    const Index r = ki.dim_r;

    std::vector<StateVector> psis;
    Index rp_max = 1;
    for (const auto& b : ki.blocks) {
        psis.push_back(purify_vector(b.rho_qr, "R'"));
        rp_max = std::max(rp_max, psis.back().dims().dim_of("R'"));
    }

    SystemDims dims({{"C", c}, {"Q", qm}, {"R", r}, {"R'", rp_max}, {"C'", c}});
    MatrixXcd big = MatrixXcd::Zero(dims.total(), dims.total());
    for (Index j = 0; j < c; ++j) {
        const auto& b = ki.blocks[static_cast<size_t>(j)];
        const auto& psi = psis[static_cast<size_t>(j)].vector();
        const Index rp = psis[static_cast<size_t>(j)].dims().dim_of("R'");
        auto gidx = [&](Index q, Index rr, Index k) {
            return dims.flat({j, q, rr, k, j});
        };
        auto sidx = [&](Index q, Index rr, Index k) { return (q * r + rr) * rp + k; };
        for (Index q = 0; q < b.q_dim; ++q)
            for (Index rr = 0; rr < r; ++rr)
                for (Index k = 0; k < rp; ++k)
                    for (Index q2 = 0; q2 < b.q_dim; ++q2)
                        for (Index r2 = 0; r2 < r; ++r2)
                            for (Index k2 = 0; k2 < rp; ++k2)
                                big(gidx(q, rr, k), gidx(q2, r2, k2)) +=
                                    b.p * psi(sidx(q, rr, k)) * std::conj(psi(sidx(q2, r2, k2)));
    }
    return MultipartiteState(dims, std::move(big));
}

}  // namespace qki
