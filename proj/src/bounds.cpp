#include "qki/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <utility>

#include "qki/entropy.hpp"
#include "qki/errors.hpp"
#include "qki/linalg.hpp"
#include "qki/state.hpp"

#include "json_util.hpp"

namespace qki {

namespace {

using la::MatrixXcd;
using la::VectorXcd;

// Entropy of a group of a pure state via the smaller side.
double ent(const StateVector& s, const std::vector<std::string>& group) {
    Index dg = 1;
    for (const auto& l : group) dg *= s.dims().dim_of(l);
    if (dg * dg <= s.dims().total()) return s.entropy_on(group);
    return s.entropy_on(s.dims().complement(group).labels());
}

// Source state extended by a copy of the block label: dims {C, Q, N, R, Cp}.
MultipartiteState omega_with_copy(const KIDecomposition& ki) {
    const MultipartiteState base = assemble_omega(ki);
    const MatrixXcd& m = base.matrix();
    const Index c = ki.c_dim();
    const Index stride = ki.q_max() * ki.n_max() * ki.dim_r;
    const Index d = m.rows();
    MatrixXcd ext = MatrixXcd::Zero(d * c, d * c);
    for (Index x = 0; x < d; ++x)
        for (Index y = 0; y < d; ++y) {
            if (m(x, y) == la::cplx(0.0, 0.0)) continue;
            ext(x * c + x / stride, y * c + y / stride) = m(x, y);
        }
    SystemDims dims({{"C", c},
                     {"Q", ki.q_max()},
                     {"N", ki.n_max()},
                     {"R", ki.dim_r},
                     {"Cp", c}});
    return MultipartiteState(dims, ext);
}

struct Evaluator {
    MultipartiteState omega4;  // {C, Q, N, R} reference for the fidelity
    StateVector ext_pure;      // purified {C, Q, N, R, Cp, G}
    SystemDims out_dims;       // {C, Q, N, E}
};

Evaluator make_evaluator(const KIDecomposition& ki, Index dim_e) {
    return Evaluator{assemble_omega(ki), purify_vector(omega_with_copy(ki), "G"),
                     SystemDims({{"C", ki.c_dim()},
                                 {"Q", ki.q_max()},
                                 {"N", ki.n_max()},
                                 {"E", dim_e}})};
}

ObjectiveValue evaluate(const Evaluator& ev, const MatrixXcd& u, BoundKind which) {
    const StateVector tau = ev.ext_pure.applied(u, {"C", "Q", "N"}, ev.out_dims);
    const double s_ne_cp = ent(tau, {"N", "E", "Cp"});
    const double s_cp = ent(tau, {"Cp"});
    double value = 0.0;
    if (which == BoundKind::Z) {
        value = s_ne_cp - s_cp;
    } else {
        const double s_cq_cp = ent(tau, {"C", "Q", "Cp"});
        const double s_all_cp = ent(tau, {"N", "E", "C", "Q", "Cp"});
        value = s_ne_cp + s_cq_cp - s_all_cp - s_cp;
    }
    const double f = fidelity(ev.omega4, tau.density_on({"C", "Q", "N", "R"}));
    return ObjectiveValue{value, f};
}

struct BestPoint {
    bool found = false;
    double value = 0.0;
    double fid = 0.0;
    MatrixXcd u;
    Index start = 0;
};

// Feasible points only; strict improvement keeps the earliest start on ties.
void consider(BestPoint& best, const ObjectiveValue& ov, const MatrixXcd& u,
              Index start, double epsilon) {
    if (ov.fidelity < 1.0 - epsilon - 1e-9) return;
    if (best.found && ov.value <= best.value) return;
    best.found = true;
    best.value = ov.value;
    best.fid = ov.fidelity;
    best.u = u;
    best.start = start;
}

constexpr double kPenaltyStart = 10.0;
constexpr double kPenaltyGrowth = 10.0;
constexpr int kPenaltyRounds = 5;

double penalized(const ObjectiveValue& ov, double epsilon, double lambda) {
    const double gap = std::max(0.0, (1.0 - epsilon) - ov.fidelity);
    return ov.value - lambda * gap * gap;
}

// (1+1) evolutionary ascent on the isometry manifold: Gaussian perturbation of
// the current point, re-orthonormalized; step size adapts to acceptance.
void search_from(const Evaluator& ev, BoundKind which, double epsilon,
                 const MatrixXcd& start, Index iterations, Index start_index,
                 Rng& rng, BestPoint& best) {
    MatrixXcd cur_u = start;
    ObjectiveValue cur = evaluate(ev, cur_u, which);
    consider(best, cur, cur_u, start_index, epsilon);
    double sigma = 0.3;
    double lambda = kPenaltyStart;
    for (int round = 0; round < kPenaltyRounds; ++round) {
        for (Index it = 0; it < iterations; ++it) {
            const MatrixXcd noise = random_gaussian(cur_u.rows(), cur_u.cols(), rng);
            const MatrixXcd u = la::orthonormalize_columns(cur_u + sigma * noise);
            if (u.cols() != cur_u.cols()) continue;
            const ObjectiveValue ov = evaluate(ev, u, which);
            consider(best, ov, u, start_index, epsilon);
            if (penalized(ov, epsilon, lambda) > penalized(cur, epsilon, lambda)) {
                cur_u = u;
                cur = ov;
                sigma = std::min(sigma * 1.2, 1.0);
            } else {
                sigma = std::max(sigma * 0.85, 1e-3);
            }
        }
        lambda *= kPenaltyGrowth;
    }
}

BoundEstimate estimate_impl(const KIDecomposition& ki, double epsilon, BoundKind which,
                            const BoundBudget& budget, std::uint64_t seed,
                            const MatrixXcd* warm) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw Error("bound epsilon must lie in [0, 1]");
    if (budget.restarts < 1 || budget.iterations < 1)
        throw Error("bound budget needs at least one restart and one iteration");
    ki.validate();
    const Index cqn = ki.c_dim() * ki.q_max() * ki.n_max();
    if (cqn > kBoundsCqnCap) {
        char msg[96];
        std::snprintf(msg, sizeof msg, "bound search needs padded dimension %lld (cap %lld)",
                      static_cast<long long>(cqn), static_cast<long long>(kBoundsCqnCap));
        throw DimTooLarge(msg);
    }
    const Index dim_e = default_env_dim(ki);
    const Evaluator ev = make_evaluator(ki, dim_e);
    Rng rng(seed);
    BestPoint best;
    Index used = 0;
    if (warm != nullptr && warm->rows() == cqn * dim_e && warm->cols() == cqn) {
        search_from(ev, which, epsilon, *warm, budget.iterations, used, rng, best);
        ++used;
    }
    for (Index r = 0; r < budget.restarts; ++r, ++used) {
        MatrixXcd start;
        if (r == 0)
            start = identity_ansatz(ki, dim_e).u;
        else if (r % 2 == 1)
            start = block_ansatz(ki, dim_e, rng).u;
        else
            start = random_ansatz(ki, dim_e, rng).u;
        search_from(ev, which, epsilon, start, budget.iterations, used, rng, best);
    }
    if (!best.found) throw NoFeasiblePoint("no ansatz met the fidelity constraint");

    BoundEstimate out;
    out.epsilon = epsilon;
    out.kind = which;
    out.restarts_used = used;
    out.achieved_fidelity = best.fid;
    out.j_value = evaluate(ev, best.u, BoundKind::J).value;
    out.z_value = evaluate(ev, best.u, BoundKind::Z).value;
    out.ansatz = IsometryAnsatz{ki.c_dim(), ki.q_max(), ki.n_max(), dim_e, best.u};
    return out;
}

// Contiguous repacking of merged block coordinates: physical products first,
// in row-major order, padding after. Identity when the right factor's blocks
// all span their padded register.
std::vector<Index> pack_map(Index phys_a, Index full_a, Index phys_b, Index full_b) {
    std::vector<Index> map(static_cast<size_t>(full_a * full_b), 0);
    Index next_pad = phys_a * phys_b;
    for (Index x = 0; x < full_a; ++x)
        for (Index y = 0; y < full_b; ++y) {
            const Index flat = x * full_b + y;
            if (x < phys_a && y < phys_b)
                map[static_cast<size_t>(flat)] = x * phys_b + y;
            else
                map[static_cast<size_t>(flat)] = next_pad++;
        }
    return map;
}

struct PackTables {
    Index c2 = 0, qm1 = 0, qm2 = 0, nm1 = 0, nm2 = 0;
    std::vector<std::vector<Index>> q;  // per block pair, row-major
    std::vector<std::vector<Index>> n;

    Index pair(Index ja, Index jb) const { return ja * c2 + jb; }
    Index row(Index ja, Index qa, Index na, Index jb, Index qb, Index nb) const {
        const Index p = pair(ja, jb);
        const Index qc = q[static_cast<size_t>(p)][static_cast<size_t>(qa * qm2 + qb)];
        const Index nc = n[static_cast<size_t>(p)][static_cast<size_t>(na * nm2 + nb)];
        return (p * (qm1 * qm2) + qc) * (nm1 * nm2) + nc;
    }
};

PackTables make_pack_tables(const KIDecomposition& a, const KIDecomposition& b) {
    PackTables t;
    t.c2 = b.c_dim();
    t.qm1 = a.q_max();
    t.qm2 = b.q_max();
    t.nm1 = a.n_max();
    t.nm2 = b.n_max();
    for (const auto& ba : a.blocks)
        for (const auto& bb : b.blocks) {
            t.q.push_back(pack_map(ba.q_dim, t.qm1, bb.q_dim, t.qm2));
            t.n.push_back(pack_map(ba.n_dim, t.nm1, bb.n_dim, t.nm2));
        }
    return t;
}

}  // namespace

void IsometryAnsatz::validate(double tol) const {
    if (dim_c < 1 || dim_q < 1 || dim_n < 1 || dim_e < 1)
        throw DimMismatch("ansatz dimensions must be positive");
    if (u.rows() != out_dim() || u.cols() != in_dim())
        throw DimMismatch("ansatz matrix is " + std::to_string(u.rows()) + "x" +
                          std::to_string(u.cols()) + ", expected " + std::to_string(out_dim()) +
                          "x" + std::to_string(in_dim()));
    const MatrixXcd g = u.adjoint() * u;
    const double err = (g - MatrixXcd::Identity(in_dim(), in_dim())).cwiseAbs().maxCoeff();
    if (err > tol)
        throw InvariantViolation("ansatz is not an isometry: deviation " + std::to_string(err));
}

Index default_env_dim(const KIDecomposition& ki) {
    const Index cqn = ki.c_dim() * ki.q_max() * ki.n_max();
    return std::min<Index>(cqn * cqn, 64);
}

IsometryAnsatz identity_ansatz(const KIDecomposition& ki, Index dim_e) {
    if (dim_e < 1) throw DimMismatch("environment dimension must be positive");
    IsometryAnsatz a{ki.c_dim(), ki.q_max(), ki.n_max(), dim_e, MatrixXcd()};
    a.u = MatrixXcd::Zero(a.out_dim(), a.in_dim());
    for (Index x = 0; x < a.in_dim(); ++x) a.u(x * dim_e, x) = 1.0;
    return a;
}

IsometryAnsatz block_ansatz(const KIDecomposition& ki, Index dim_e, Rng& rng) {
    IsometryAnsatz a = identity_ansatz(ki, dim_e);
    const Index qm = ki.q_max();
    const Index nm = ki.n_max();
    for (Index j = 0; j < ki.c_dim(); ++j) {
        const KIBlock& blk = ki.blocks[static_cast<size_t>(j)];
        const MatrixXcd v = random_commuting_unitary(blk.omega.matrix(), rng);
        for (Index q = 0; q < blk.q_dim; ++q)
            for (Index m = 0; m < blk.n_dim; ++m) {
                const Index col = (j * qm + q) * nm + m;
                a.u.col(col).setZero();
                for (Index m2 = 0; m2 < blk.n_dim; ++m2)
                    a.u(((j * qm + q) * nm + m2) * dim_e, col) = v(m2, m);
            }
    }
    return a;
}

IsometryAnsatz random_ansatz(const KIDecomposition& ki, Index dim_e, Rng& rng) {
    if (dim_e < 1) throw DimMismatch("environment dimension must be positive");
    IsometryAnsatz a{ki.c_dim(), ki.q_max(), ki.n_max(), dim_e, MatrixXcd()};
    a.u = random_isometry_matrix(a.in_dim(), a.out_dim(), rng);
    return a;
}

ObjectiveValue objective(const IsometryAnsatz& u, const KIDecomposition& ki, BoundKind which) {
    if (u.dim_c != ki.c_dim() || u.dim_q != ki.q_max() || u.dim_n != ki.n_max())
        throw DimMismatch("ansatz register dims do not match the decomposition");
    u.validate();
    const Evaluator ev = make_evaluator(ki, u.dim_e);
    return evaluate(ev, u.u, which);
}

BoundEstimate estimate(const KIDecomposition& ki, double epsilon, BoundKind which,
                       const BoundBudget& budget, std::uint64_t seed) {
    return estimate_impl(ki, epsilon, which, budget, seed, nullptr);
}

std::vector<BoundEstimate> envelope(const KIDecomposition& ki, const std::vector<double>& epsilons,
                                    BoundKind which, const BoundBudget& budget,
                                    std::uint64_t seed) {
    if (epsilons.empty()) throw Error("envelope needs at least one epsilon");
    for (size_t i = 1; i < epsilons.size(); ++i)
        if (epsilons[i] < epsilons[i - 1])
            throw Error("envelope epsilons must be sorted ascending");
    std::vector<BoundEstimate> out;
    out.reserve(epsilons.size());
    for (size_t i = 0; i < epsilons.size(); ++i) {
        if (i > 0 && epsilons[i] == epsilons[i - 1]) {
            out.push_back(out.back());
            continue;
        }
        MatrixXcd warm_u;
        bool have_warm = false;
        if (!out.empty()) {
            warm_u = out.back().ansatz.u;
            have_warm = true;
        }
        out.push_back(estimate_impl(ki, epsilons[i], which, budget,
                                    seed + 0x9e3779b97f4a7c15ull * i,
                                    have_warm ? &warm_u : nullptr));
    }
    return out;
}

std::vector<double> upper_concave_envelope(const std::vector<BoundEstimate>& points) {
    if (points.empty()) return {};
    for (size_t i = 1; i < points.size(); ++i)
        if (points[i].epsilon < points[i - 1].epsilon)
            throw Error("envelope points must be sorted by epsilon");
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : points) {
        if (!pts.empty() && pts.back().first == p.epsilon)
            pts.back().second = std::max(pts.back().second, p.value());
        else
            pts.emplace_back(p.epsilon, p.value());
    }
    std::vector<std::pair<double, double>> hull;
    for (const auto& p : pts) {
        while (hull.size() >= 2) {
            const auto& o = hull[hull.size() - 2];
            const auto& a = hull[hull.size() - 1];
            const double cross = (a.first - o.first) * (p.second - o.second) -
                                 (a.second - o.second) * (p.first - o.first);
            if (cross >= 0.0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(p);
    }
    std::vector<double> out;
    out.reserve(points.size());
    size_t k = 0;
    for (const auto& p : points) {
        const double x = p.epsilon;
        while (k + 1 < hull.size() && hull[k + 1].first <= x) ++k;
        if (hull[k].first == x || k + 1 >= hull.size()) {
            out.push_back(hull[k].second);
        } else {
            const auto& l = hull[k];
            const auto& r = hull[k + 1];
            const double t = (x - l.first) / (r.first - l.first);
            out.push_back(l.second + t * (r.second - l.second));
        }
    }
    return out;
}

KIDecomposition tensor_decomposition(const KIDecomposition& a, const KIDecomposition& b) {
    a.validate();
    b.validate();
    KIDecomposition out;
    out.dim_a = a.dim_a * b.dim_a;
    out.dim_r = a.dim_r * b.dim_r;
    for (const auto& ba : a.blocks)
        for (const auto& bb : b.blocks) {
            const Index q_dim = ba.q_dim * bb.q_dim;
            const Index n_dim = ba.n_dim * bb.n_dim;
            MultipartiteState omega(SystemDims({{"N", n_dim}}),
                                    la::kron(ba.omega.matrix(), bb.omega.matrix()));
            const SystemDims qr_from({{"Qa", ba.q_dim},
                                      {"Ra", a.dim_r},
                                      {"Qb", bb.q_dim},
                                      {"Rb", b.dim_r}});
            const MatrixXcd merged =
                la::permute_matrix(qr_from, la::kron(ba.rho_qr.matrix(), bb.rho_qr.matrix()),
                                   qr_from.subset_as_given({"Qa", "Qb", "Ra", "Rb"}));
            MultipartiteState rho_qr(SystemDims({{"Q", q_dim}, {"R", out.dim_r}}), merged);
            out.blocks.push_back(
                KIBlock{ba.p * bb.p, q_dim, n_dim, std::move(omega), std::move(rho_qr)});
        }

    const PackTables t = make_pack_tables(a, b);
    const SystemDims row_from({{"Ca", a.c_dim()},
                               {"Qa", a.q_max()},
                               {"Na", a.n_max()},
                               {"Cb", b.c_dim()},
                               {"Qb", b.q_max()},
                               {"Nb", b.n_max()}});
    const MatrixXcd big = la::kron(a.u_ki, b.u_ki);
    out.u_ki = MatrixXcd::Zero(big.rows(), big.cols());
    for (Index src = 0; src < big.rows(); ++src) {
        const std::vector<Index> w = row_from.unflat(src);
        out.u_ki.row(t.row(w[0], w[1], w[2], w[3], w[4], w[5])) = big.row(src);
    }
    out.support_proj = la::kron(a.support_proj, b.support_proj);
    out.validate();
    return out;
}

IsometryAnsatz tensor_ansatz(const IsometryAnsatz& ua, const KIDecomposition& a,
                             const IsometryAnsatz& ub, const KIDecomposition& b) {
    ua.validate();
    ub.validate();
    if (ua.dim_c != a.c_dim() || ua.dim_q != a.q_max() || ua.dim_n != a.n_max() ||
        ub.dim_c != b.c_dim() || ub.dim_q != b.q_max() || ub.dim_n != b.n_max())
        throw DimMismatch("ansatz register dims do not match the factor decompositions");
    const PackTables t = make_pack_tables(a, b);
    IsometryAnsatz out{a.c_dim() * b.c_dim(), a.q_max() * b.q_max(), a.n_max() * b.n_max(),
                       ua.dim_e * ub.dim_e, MatrixXcd()};
    out.u = MatrixXcd::Zero(out.out_dim(), out.in_dim());
    const SystemDims rowa({{"C", ua.dim_c}, {"Q", ua.dim_q}, {"N", ua.dim_n}, {"E", ua.dim_e}});
    const SystemDims rowb({{"C", ub.dim_c}, {"Q", ub.dim_q}, {"N", ub.dim_n}, {"E", ub.dim_e}});
    const SystemDims cola({{"C", ua.dim_c}, {"Q", ua.dim_q}, {"N", ua.dim_n}});
    const SystemDims colb({{"C", ub.dim_c}, {"Q", ub.dim_q}, {"N", ub.dim_n}});
    for (Index ra = 0; ra < ua.u.rows(); ++ra) {
        const std::vector<Index> va = rowa.unflat(ra);
        for (Index rb = 0; rb < ub.u.rows(); ++rb) {
            const std::vector<Index> vb = rowb.unflat(rb);
            const Index row =
                t.row(va[0], va[1], va[2], vb[0], vb[1], vb[2]) * out.dim_e +
                (va[3] * ub.dim_e + vb[3]);
            for (Index ca = 0; ca < ua.u.cols(); ++ca) {
                const la::cplx za = ua.u(ra, ca);
                if (za == la::cplx(0.0, 0.0)) continue;
                const std::vector<Index> wa = cola.unflat(ca);
                for (Index cb = 0; cb < ub.u.cols(); ++cb) {
                    const la::cplx zb = ub.u(rb, cb);
                    if (zb == la::cplx(0.0, 0.0)) continue;
                    const std::vector<Index> wb = colb.unflat(cb);
                    out.u(row, t.row(wa[0], wa[1], wa[2], wb[0], wb[1], wb[2])) = za * zb;
                }
            }
        }
    }
    return out;
}

BoundEstimate tensor_feasible(const BoundEstimate& a, const KIDecomposition& ka,
                              const BoundEstimate& b, const KIDecomposition& kb) {
    BoundEstimate out;
    out.achieved_fidelity = a.achieved_fidelity * b.achieved_fidelity;
    // Factors may sit up to the tolerance below their own constraint, so the
    // combined epsilon absorbs that slack to keep the reported point feasible.
    out.epsilon = std::max(1.0 - (1.0 - a.epsilon) * (1.0 - b.epsilon),
                           1.0 - out.achieved_fidelity);
    out.j_value = a.j_value + b.j_value;
    out.z_value = a.z_value + b.z_value;
    out.kind = a.kind;
    out.ansatz = tensor_ansatz(a.ansatz, ka, b.ansatz, kb);
    out.restarts_used = 0;
    return out;
}

std::string bounds_csv(const std::vector<BoundEstimate>& j_env,
                       const std::vector<BoundEstimate>& z_env) {
    if (j_env.size() != z_env.size()) throw DimMismatch("bound envelopes differ in length");
    std::string out = "epsilon,J_lower,Z_lower,fidelity,restarts\n";
    char line[160];
    for (size_t i = 0; i < j_env.size(); ++i) {
        const BoundEstimate& j = j_env[i];
        const BoundEstimate& z = z_env[i];
        if (j.epsilon != z.epsilon) throw DimMismatch("bound envelopes use different epsilon grids");
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%lld\n", j.epsilon, j.j_value,
                      z.z_value, std::min(j.achieved_fidelity, z.achieved_fidelity),
                      static_cast<long long>(std::max(j.restarts_used, z.restarts_used)));
        out += line;
    }
    return out;
}

std::string ansatz_to_json(const IsometryAnsatz& a) {
    jsonu::json j;
    j["dim_c"] = a.dim_c;
    j["dim_q"] = a.dim_q;
    j["dim_n"] = a.dim_n;
    j["dim_e"] = a.dim_e;
    j["u_re"] = jsonu::matrix_part(a.u, true);
    j["u_im"] = jsonu::matrix_part(a.u, false);
    return j.dump(2);
}

IsometryAnsatz ansatz_from_json(const std::string& text) {
    jsonu::json j;
    try {
        j = jsonu::json::parse(text);
    } catch (const std::exception& e) {
        throw Error(std::string("ansatz json: ") + e.what());
    }
    IsometryAnsatz a;
    try {
        a.dim_c = j.at("dim_c").get<long long>();
        a.dim_q = j.at("dim_q").get<long long>();
        a.dim_n = j.at("dim_n").get<long long>();
        a.dim_e = j.at("dim_e").get<long long>();
        a.u = jsonu::matrix_from_parts(j.at("u_re"), j.at("u_im"), "ansatz");
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(std::string("ansatz json: ") + e.what());
    }
    a.validate();
    return a;
}

}  // namespace qki
