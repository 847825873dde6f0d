#include <algorithm>
#include <cmath>

#include "qki/entropy.hpp"
#include "qki/errors.hpp"
#include "qki/ki.hpp"

namespace qki {

namespace {

constexpr double kFidelityTol = 1e-9;
constexpr double kCmiTol = 1e-8;
constexpr double kBlockFormTol = 1e-8;

// Flat index of |j,q,n> in the padded C x Q x N space.
Index cqn_flat(Index j, Index q, Index n, Index q_max, Index n_max) {
    return (j * q_max + q) * n_max + n;
}

}  // namespace

Index KIDecomposition::q_max() const {
    Index m = 1;
    for (const auto& b : blocks) m = std::max(m, b.q_dim);
    return m;
}

Index KIDecomposition::n_max() const {
    Index m = 1;
    for (const auto& b : blocks) m = std::max(m, b.n_dim);
    return m;
}

SystemDims KIDecomposition::cqn_dims() const {
    return SystemDims({{"C", c_dim()}, {"Q", q_max()}, {"N", n_max()}});
}

SystemDims KIDecomposition::cqnr_dims() const {
    return cqn_dims().concat(SystemDims({{"R", dim_r}}));
}

void KIDecomposition::validate(double tol) const {
    if (blocks.empty()) throw InvariantViolation("decomposition has no blocks");
    double psum = 0.0;
    for (const auto& b : blocks) {
        if (b.p < -tol) throw InvariantViolation("negative block weight");
        psum += b.p;
        if (b.omega.dims().labels() != std::vector<std::string>{"N"} ||
            b.omega.dims().dim_of("N") != b.n_dim)
            throw InvariantViolation("omega dims disagree with the block");
        if (b.rho_qr.dims().labels() != std::vector<std::string>{"Q", "R"} ||
            b.rho_qr.dims().dim_of("Q") != b.q_dim || b.rho_qr.dims().dim_of("R") != dim_r)
            throw InvariantViolation("rho_qr dims disagree with the block");
        b.omega.validate_full();
        b.rho_qr.validate_full();
    }
    if (std::abs(psum - 1.0) > tol) throw InvariantViolation("block weights do not sum to 1");
    const Index cqn = c_dim() * q_max() * n_max();
    if (u_ki.rows() != cqn || u_ki.cols() != dim_a)
        throw InvariantViolation("U_KI has the wrong shape");
    if (support_proj.rows() != dim_a || support_proj.cols() != dim_a)
        throw InvariantViolation("support projector has the wrong shape");
    if ((support_proj * support_proj - support_proj).cwiseAbs().maxCoeff() > tol)
        throw InvariantViolation("support projector is not idempotent");
    if ((u_ki.adjoint() * u_ki - support_proj).cwiseAbs().maxCoeff() > tol)
        throw InvariantViolation("U_KI is not an isometry on the support");
}

MultipartiteState assemble_omega(const KIDecomposition& ki) {
    const Index qm = ki.q_max();
    const Index nm = ki.n_max();
    const Index r = ki.dim_r;
    const SystemDims dims = ki.cqnr_dims();
    MatrixXcd big = MatrixXcd::Zero(dims.total(), dims.total());
    for (Index j = 0; j < ki.c_dim(); ++j) {
        const auto& b = ki.blocks[static_cast<size_t>(j)];
        auto small = tensor(b.rho_qr, b.omega).permuted({"Q", "N", "R"});
        const auto& sm = small.matrix();
        auto gidx = [&](Index q, Index n, Index rr) {
            return cqn_flat(j, q, n, qm, nm) * r + rr;
        };
        auto sidx = [&](Index q, Index n, Index rr) { return (q * b.n_dim + n) * r + rr; };
        for (Index q = 0; q < b.q_dim; ++q)
            for (Index n = 0; n < b.n_dim; ++n)
                for (Index rr = 0; rr < r; ++rr)
                    for (Index q2 = 0; q2 < b.q_dim; ++q2)
                        for (Index n2 = 0; n2 < b.n_dim; ++n2)
                            for (Index r2 = 0; r2 < r; ++r2)
                                big(gidx(q, n, rr), gidx(q2, n2, r2)) +=
                                    b.p * sm(sidx(q, n, rr), sidx(q2, n2, r2));
    }
    return MultipartiteState(dims, std::move(big));
}

MultipartiteState reconstruct(const KIDecomposition& ki) {
    auto omega = assemble_omega(ki);
    const Index r = ki.dim_r;
    MatrixXcd main = la::sandwich_front(ki.u_ki.adjoint(), omega.matrix(), r);
    const double kept = main.trace().real();
    const double leftover = 1.0 - kept;
    SystemDims ar({{"A", ki.dim_a}, {"R", r}});
    if (leftover > 1e-14) {
        const Index cqn = ki.u_ki.rows();
        MatrixXcd outside = MatrixXcd::Identity(cqn, cqn) - ki.u_ki * ki.u_ki.adjoint();
        SystemDims split({{"CQN", cqn}, {"R", r}});
        MatrixXcd cut = la::kron(outside, MatrixXcd::Identity(r, r)) * omega.matrix();
        MatrixXcd r_part = la::partial_trace_raw(split, cut, {"R"});
        const double rank = std::round(ki.support_proj.trace().real());
        MatrixXcd sigma = ki.support_proj / rank;
        main += la::kron(sigma, la::hermitize(r_part));
    }
    return MultipartiteState(ar, la::hermitize(main));
}

KIDecomposition ki_decompose(const MultipartiteState& rho_ar, const Povm& povm_on_r,
                             uint64_t seed) {
    if (!rho_ar.dims().has("A") || !rho_ar.dims().has("R") || rho_ar.dims().count() != 2)
        throw DimMismatch("ki_decompose: state labels must be exactly {A, R}");
    auto s = rho_ar.permuted({"A", "R"});
    const Index da = s.dims().dim_of("A");
    const Index dr = s.dims().dim_of("R");

    MatrixXcd rho_a = la::partial_trace_raw(s.dims(), s.matrix(), {"A"});
    la::HermEig ea = la::eig_herm(la::hermitize(rho_a));
    Index rank = 0;
    for (Index i = 0; i < da; ++i)
        if (ea.vals(i) > la::kSuppTol) ++rank;
    MatrixXcd v_supp = ea.vecs.rightCols(rank);

    Ensemble ensemble = measure_reference(s, povm_on_r);
    Ensemble restricted;
    restricted.weights = ensemble.weights;
    for (const auto& st : ensemble.states) {
        MatrixXcd proj = la::hermitize(v_supp.adjoint() * st * v_supp);
        proj /= proj.trace().real();
        restricted.states.push_back(std::move(proj));
    }

    Rng rng(seed);
    MatrixAlgebra alg = generate_algebra(restricted);
    BlockStructure bs = decompose_algebra(alg, rng);
    MatrixXcd v_total = v_supp * alg.support;  // A -> algebra coordinates

    // sort blocks canonically by (weight, Q dim, N dim), all descending
    MatrixXcd rho_alg = la::hermitize(v_total.adjoint() * rho_a * v_total);
    std::vector<std::pair<double, size_t>> order;
    for (size_t j = 0; j < bs.blocks.size(); ++j) {
        const auto& b = bs.blocks[j];
        order.push_back({(b.basis_cols.adjoint() * rho_alg * b.basis_cols).trace().real(), j});
    }
    std::stable_sort(order.begin(), order.end(), [&](const auto& x, const auto& y) {
        const auto& bx = bs.blocks[x.second];
        const auto& by = bs.blocks[y.second];
        if (std::abs(x.first - y.first) > 1e-12) return x.first > y.first;
        if (bx.q_dim != by.q_dim) return bx.q_dim > by.q_dim;
        return bx.n_dim > by.n_dim;
    });

    KIDecomposition ki;
    ki.dim_a = da;
    ki.dim_r = dr;
    ki.support_proj = la::hermitize(v_supp * v_supp.adjoint());

    Index qm = 1, nm = 1;
    for (const auto& b : bs.blocks) {
        qm = std::max(qm, b.q_dim);
        nm = std::max(nm, b.n_dim);
    }
    const Index c = static_cast<Index>(bs.blocks.size());
    MatrixXcd u = MatrixXcd::Zero(c * qm * nm, da);
    for (Index j = 0; j < c; ++j) {
        const auto& b = bs.blocks[order[static_cast<size_t>(j)].second];
        MatrixXcd to_block = b.w * b.basis_cols.adjoint() * v_total.adjoint();
        for (Index q = 0; q < b.q_dim; ++q)
            for (Index n = 0; n < b.n_dim; ++n)
                u.row(cqn_flat(j, q, n, qm, nm)) = to_block.row(q * b.n_dim + n);
    }
    ki.u_ki = u;

    SystemDims cqnr({{"C", c}, {"Q", qm}, {"N", nm}, {"R", dr}});
    MatrixXcd omega_mat = la::hermitize(la::sandwich_front(u, s.matrix(), dr));
    auto omega_full = MultipartiteState::unchecked(cqnr, omega_mat);

    for (Index j = 0; j < c; ++j) {
        const auto& b = bs.blocks[order[static_cast<size_t>(j)].second];
        const Index bd = b.q_dim * b.n_dim * dr;
        MatrixXcd cond(bd, bd);
        auto gidx = [&](Index q, Index n, Index rr) {
            return cqn_flat(j, q, n, qm, nm) * dr + rr;
        };
        Index row = 0;
        for (Index q = 0; q < b.q_dim; ++q)
            for (Index n = 0; n < b.n_dim; ++n)
                for (Index rr = 0; rr < dr; ++rr, ++row) {
                    Index col = 0;
                    for (Index q2 = 0; q2 < b.q_dim; ++q2)
                        for (Index n2 = 0; n2 < b.n_dim; ++n2)
                            for (Index r2 = 0; r2 < dr; ++r2, ++col)
                                cond(row, col) = omega_mat(gidx(q, n, rr), gidx(q2, n2, r2));
                }
        const double p = cond.trace().real();
        if (p <= 0) throw VerificationFailed("ki_decompose: block carries no weight");
        cond = la::hermitize(cond) / p;
        SystemDims qnr({{"Q", b.q_dim}, {"N", b.n_dim}, {"R", dr}});
        auto cond_state = MultipartiteState::unchecked(qnr, cond);
        KIBlock kb{p, b.q_dim, b.n_dim, partial_trace(cond_state, {"N"}),
                   partial_trace(cond_state, {"Q", "R"})};

        // mandatory verification: the conditional block state factorizes
        auto ideal = tensor(kb.rho_qr, kb.omega).permuted({"Q", "N", "R"});
        if (trace_distance(cond_state, ideal) > kBlockFormTol)
            throw VerificationFailed(
                "ki_decompose: block state is not a product of omega and rho_qr");
        ki.blocks.push_back(std::move(kb));
    }

    ki.validate(1e-9);
    if (conditional_mutual_information(omega_full, {"N"}, {"Q", "R"}, {"C"}) > kCmiTol)
        throw VerificationFailed("ki_decompose: I(N:QR|C) exceeds tolerance on the image state");

    auto rec = reconstruct(ki);
    const double td = trace_distance(rec, s);
    if (td > kFidelityTol && fidelity(rec, s) < 1.0 - kFidelityTol)
        throw VerificationFailed("ki_decompose: reconstruction fidelity below 1-1e-9");
    return ki;
}

KIDecomposition ki_decompose(const MultipartiteState& rho_ar, uint64_t seed) {
    if (!rho_ar.dims().has("R")) throw DimMismatch("ki_decompose: missing label R");
    return ki_decompose(rho_ar, make_ic_povm(rho_ar.dims().dim_of("R")), seed);
}

}  // namespace qki
