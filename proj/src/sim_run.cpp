#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qki/entropy.hpp"
#include "qki/errors.hpp"
#include "qki/rates.hpp"
#include "qki/sim.hpp"
#include "qki/state.hpp"
#include "sim_detail.hpp"

namespace qki {

namespace {

using cxd = std::complex<double>;

// Junk mass below this cannot move any reported fidelity at the tested
// tolerances, so the completion branch is skipped entirely.
constexpr double kJunkEps = 1e-14;

// (<v| x 1_R) as an r x (|v| r) matrix so padded Q contractions become
// plain matrix products.
MatrixXcd bra_lift(const VectorXcd& v, Index r) {
    MatrixXcd l = MatrixXcd::Zero(r, v.size() * r);
    for (Index q = 0; q < v.size(); ++q)
        for (Index rr = 0; rr < r; ++rr) l(rr, q * r + rr) = std::conj(v(q));
    return l;
}

// Per-block spectral data, padded to the common Q register so that
// cross-block contractions line up. Only nonzero eigenvalues are kept;
// everything downstream enumerates support words.
struct BlockData {
    double p = 0.0;
    Index q_rank = 0;
    Index qr_rank = 0;
    la::VectorXd mu;              // spectrum of rho_j^Q, descending
    la::VectorXd lam;             // spectrum of rho_j^{QR}, descending
    MatrixXcd rho_pad;            // rho_j^{QR} on the padded register
    MatrixXcd v;                  // padded eigenvectors of rho_j^Q
    std::vector<MatrixXcd> avec;  // avec[u] = (<v_u| x 1_R) W, r x qr_rank
    std::vector<MatrixXcd> t;     // t[u] = avec[u]^+ avec[u]
    std::vector<MatrixXcd> g;     // g[u] = (<v_u| x 1) rho (|v_u> x 1)
    MatrixXcd rho_r;              // R marginal
};

std::vector<BlockData> build_blocks(const KIDecomposition& ki) {
    const Index qm = ki.q_max();
    const Index r = ki.dim_r;
    std::vector<BlockData> out;
    for (const auto& blk : ki.blocks) {
        BlockData b;
        b.p = blk.p;
        b.rho_pad = MatrixXcd::Zero(qm * r, qm * r);
        b.rho_pad.topLeftCorner(blk.q_dim * r, blk.q_dim * r) = blk.rho_qr.matrix();

        detail::Spectrum sq =
            detail::sorted_spectrum(partial_trace(blk.rho_qr, {"Q"}).matrix());
        b.q_rank = sq.rank;
        b.mu = sq.vals.head(sq.rank);
        b.v = MatrixXcd::Zero(qm, sq.rank);
        b.v.topRows(blk.q_dim) = sq.vecs.leftCols(sq.rank);

        detail::Spectrum sqr = detail::sorted_spectrum(blk.rho_qr.matrix());
        b.qr_rank = sqr.rank;
        b.lam = sqr.vals.head(sqr.rank);
        MatrixXcd w_pad = MatrixXcd::Zero(qm * r, sqr.rank);
        w_pad.topRows(blk.q_dim * r) = sqr.vecs.leftCols(sqr.rank);

        for (Index u = 0; u < b.q_rank; ++u) {
            MatrixXcd l = bra_lift(b.v.col(u), r);
            b.avec.push_back(l * w_pad);
            b.t.push_back(b.avec.back().adjoint() * b.avec.back());
            b.g.push_back(l * b.rho_pad * l.adjoint());
        }
        b.rho_r = partial_trace(blk.rho_qr, {"R"}).matrix();
        out.push_back(std::move(b));
    }
    return out;
}

// Row-major odometer, last copy fastest; matches the kron convention of
// the first factor being most significant.
bool advance(std::vector<Index>& idx, const std::vector<Index>& dims) {
    for (size_t k = idx.size(); k-- > 0;) {
        if (++idx[k] < dims[k]) return true;
        idx[k] = 0;
    }
    return false;
}

double trace_sqrt(const MatrixXcd& g) {
    la::HermEig e = la::eig_herm(la::hermitize(g));
    double f = 0.0;
    for (Index i = 0; i < e.vals.size(); ++i) f += std::sqrt(std::max(0.0, e.vals(i)));
    return f;
}

// Gram matrix of one classical sector in the eigenbasis of its n-copy
// block state: the main branch p^2 D (P L P^+) D where P projects onto the
// retained code words, D carries the square roots of the eigenvalue
// products. Extra branches are added into `gram` before the trace.
struct SectorGram {
    std::vector<Index> ranks;
    Index s = 1;
    la::VectorXd sqrt_lam;
    MatrixXcd gram;
};

SectorGram sector_main(const std::vector<BlockData>& bd, const std::vector<Index>& jseq,
                       const std::vector<std::vector<Index>>& ret, double p_sector) {
    SectorGram sg;
    for (Index j : jseq) {
        sg.ranks.push_back(bd[static_cast<size_t>(j)].qr_rank);
        sg.s *= sg.ranks.back();
    }
    sg.sqrt_lam.resize(sg.s);
    std::vector<Index> idx(jseq.size(), 0);
    Index i = 0;
    do {
        double lam = 1.0;
        for (size_t k = 0; k < jseq.size(); ++k)
            lam *= bd[static_cast<size_t>(jseq[k])].lam(idx[k]);
        sg.sqrt_lam(i++) = std::sqrt(lam);
    } while (advance(idx, sg.ranks));

    MatrixXcd p_op = MatrixXcd::Zero(sg.s, sg.s);
    for (const auto& v : ret) {
        MatrixXcd acc = MatrixXcd::Identity(1, 1);
        for (size_t k = 0; k < jseq.size(); ++k)
            acc = la::kron(acc, bd[static_cast<size_t>(jseq[k])].t[static_cast<size_t>(v[k])]);
        p_op += acc;
    }
    VectorXcd lam_diag = sg.sqrt_lam.cwiseProduct(sg.sqrt_lam).cast<cxd>();
    VectorXcd d = sg.sqrt_lam.cast<cxd>();
    MatrixXcd core = p_op * lam_diag.asDiagonal() * p_op.adjoint();
    sg.gram = (p_sector * p_sector) * (d.asDiagonal() * core * d.asDiagonal());
    return sg;
}

// Completion branch: mass rerouted to the sector's fix word, carried by the
// absolute-weight operator r_junk on R^n.
void add_junk(const std::vector<BlockData>& bd, const std::vector<Index>& jseq,
              const std::vector<Index>& fix, double p_sector, const MatrixXcd& r_junk,
              SectorGram& sg) {
    MatrixXcd a = MatrixXcd::Identity(1, 1);
    for (size_t k = 0; k < jseq.size(); ++k)
        a = la::kron(a, bd[static_cast<size_t>(jseq[k])].avec[static_cast<size_t>(fix[k])]);
    VectorXcd d = sg.sqrt_lam.cast<cxd>();
    sg.gram += p_sector * (d.asDiagonal() * (a.adjoint() * r_junk * a) * d.asDiagonal());
}

MatrixXcd kron_power(const MatrixXcd& m, Index n) {
    MatrixXcd acc = MatrixXcd::Identity(1, 1);
    for (Index k = 0; k < n; ++k) acc = la::kron(acc, m);
    return acc;
}

void require_junk_feasible(Index r, Index n) {
    double bits = static_cast<double>(n) * std::log2(static_cast<double>(std::max<Index>(r, 2)));
    if (bits > 10.0 + 1e-9)
        throw DimTooLarge("completion branch needs a 2^" + std::to_string(bits) +
                          " dimensional reference operator (cap 2^10)");
}

std::vector<LabeledDim> used_dims(const KIDecomposition& ki,
                                  std::vector<LabeledDim> extra) {
    std::vector<LabeledDim> d{{"C", ki.c_dim()},
                              {"Q", ki.q_max()},
                              {"N", ki.n_max()},
                              {"R", ki.dim_r}};
    for (auto& e : extra) d.push_back(std::move(e));
    return d;
}

}  // namespace

SimulationReport run_unassisted(const KIDecomposition& ki, Index n, double rate_q) {
    if (n < 1) throw Error("copy count must be positive");
    if (rate_q < 0.0) throw Error("rate must be nonnegative");
    const Index c = ki.c_dim();
    const Index qm = ki.q_max();
    const Index r = ki.dim_r;
    const Index dim_cq = c * qm;
    detail::require_dense_bits(
        static_cast<double>(n) * std::log2(static_cast<double>(dim_cq)), "protocol run");

    std::vector<BlockData> bd = build_blocks(ki);

    std::vector<std::pair<Index, Index>> entry;  // (block, eigenvector)
    std::vector<double> weights;
    for (Index j = 0; j < c; ++j)
        for (Index u = 0; u < bd[static_cast<size_t>(j)].q_rank; ++u) {
            entry.emplace_back(j, u);
            weights.push_back(bd[static_cast<size_t>(j)].p * bd[static_cast<size_t>(j)].mu(u));
        }

    std::vector<EigenWord> words = detail::all_words(weights, n);
    detail::sort_words(words);
    const Index full =
        static_cast<Index>(std::pow(static_cast<double>(dim_cq), static_cast<double>(n)) + 0.5);
    const Index keep = detail::keep_count(n, rate_q, full);
    const Index kept = std::min<Index>(keep, static_cast<Index>(words.size()));

    double mass = 0.0;
    std::map<std::vector<Index>, std::vector<std::vector<Index>>> sectors;
    for (Index i = 0; i < kept; ++i) {
        const auto& w = words[static_cast<size_t>(i)];
        mass += w.weight;
        std::vector<Index> jseq, vseq;
        for (Index x : w.word) {
            jseq.push_back(entry[static_cast<size_t>(x)].first);
            vseq.push_back(entry[static_cast<size_t>(x)].second);
        }
        sectors[jseq].push_back(vseq);
    }
    std::vector<Index> j0, v0;
    for (Index x : words[0].word) {
        j0.push_back(entry[static_cast<size_t>(x)].first);
        v0.push_back(entry[static_cast<size_t>(x)].second);
    }
    const double junk_w = std::max(0.0, 1.0 - mass);

    MatrixXcd r_junk;
    if (junk_w > kJunkEps) {
        require_junk_feasible(r, n);
        MatrixXcd avg_r = MatrixXcd::Zero(r, r);
        for (const auto& b : bd) avg_r += b.p * b.rho_r;
        r_junk = kron_power(avg_r, n);
        for (const auto& [jseq, ret] : sectors)
            for (const auto& v : ret) {
                double coef = 1.0;
                MatrixXcd acc = MatrixXcd::Identity(1, 1);
                for (size_t k = 0; k < jseq.size(); ++k) {
                    const auto& b = bd[static_cast<size_t>(jseq[k])];
                    coef *= b.p;
                    acc = la::kron(acc, b.g[static_cast<size_t>(v[k])]);
                }
                r_junk -= coef * acc;
            }
    }

    double f = 0.0;
    for (const auto& [jseq, ret] : sectors) {
        double p_sec = 1.0;
        for (Index j : jseq) p_sec *= bd[static_cast<size_t>(j)].p;
        SectorGram sg = sector_main(bd, jseq, ret, p_sec);
        if (junk_w > kJunkEps && jseq == j0) add_junk(bd, jseq, v0, p_sec, r_junk, sg);
        f += trace_sqrt(sg.gram);
    }

    SimulationReport rep;
    rep.n = n;
    rep.rate_q = std::log2(static_cast<double>(keep)) / static_cast<double>(n);
    rep.rate_e = 0.0;
    rep.fidelity = f;
    rep.typical_mass = mass;
    rep.dims_used = used_dims(ki, {{"M", keep}});
    return rep;
}

SimulationReport run_unassisted(const MultipartiteState& rho_ar, Index n, double rate_q,
                                uint64_t seed) {
    return run_unassisted(ki_decompose(rho_ar, seed), n, rate_q);
}

SimulationReport run_assisted(const KIDecomposition& ki, Index n, double slack) {
    if (n < 1) throw Error("copy count must be positive");
    if (slack < 0.0) throw Error("slack must be nonnegative");
    const Index c = ki.c_dim();
    const Index qm = ki.q_max();
    const Index r = ki.dim_r;
    detail::require_dense_bits(
        static_cast<double>(n) * std::log2(static_cast<double>(c * qm)), "protocol run");

    std::vector<BlockData> bd = build_blocks(ki);
    RateRegion region = rate_region(ki);

    std::vector<double> ps;
    for (const auto& b : bd) ps.push_back(b.p);
    std::vector<EigenWord> sector_words = detail::all_words(ps, n);
    detail::sort_words(sector_words);
    const Index c_full = static_cast<Index>(sector_words.size());
    const Index keep_c = detail::keep_count(n, region.s_c + slack, c_full);
    const bool lossless_c = keep_c == c_full;
    const std::vector<Index>& j0 = sector_words[0].word;

    const Index q_full =
        static_cast<Index>(std::pow(static_cast<double>(qm), static_cast<double>(n)) + 0.5);
    const Index keep_q = detail::keep_count(n, region.s_q_given_c + slack, q_full);

    struct SectorPlan {
        std::vector<Index> jseq;
        double p_sec = 0.0;
        std::vector<std::vector<Index>> ret;
        double mass_q = 0.0;
    };
    std::vector<SectorPlan> plans;
    double typical_mass = 0.0;
    for (Index i = 0; i < keep_c; ++i) {
        SectorPlan plan;
        plan.jseq = sector_words[static_cast<size_t>(i)].word;
        plan.p_sec = sector_words[static_cast<size_t>(i)].weight;

        std::vector<Index> ranks;
        for (Index j : plan.jseq) ranks.push_back(bd[static_cast<size_t>(j)].q_rank);
        std::vector<EigenWord> qwords;
        std::vector<Index> idx(plan.jseq.size(), 0);
        do {
            double w = 1.0;
            for (size_t k = 0; k < plan.jseq.size(); ++k)
                w *= bd[static_cast<size_t>(plan.jseq[k])].mu(idx[k]);
            qwords.push_back({w, idx});
        } while (advance(idx, ranks));
        detail::sort_words(qwords);

        Index kept = std::min<Index>(keep_q, static_cast<Index>(qwords.size()));
        for (Index t = 0; t < kept; ++t) {
            plan.mass_q += qwords[static_cast<size_t>(t)].weight;
            plan.ret.push_back(qwords[static_cast<size_t>(t)].word);
        }
        typical_mass += plan.p_sec * plan.mass_q;
        plans.push_back(std::move(plan));
    }

    // Cross contractions between the lead sector's eigenbasis and the
    // blocks of rerouted sectors, built on demand.
    std::map<std::pair<Index, Index>, std::vector<std::vector<MatrixXcd>>> cross;
    auto cross_for = [&](Index jb, Index kb) -> const std::vector<std::vector<MatrixXcd>>& {
        auto it = cross.find({jb, kb});
        if (it != cross.end()) return it->second;
        const auto& bj = bd[static_cast<size_t>(jb)];
        const auto& bk = bd[static_cast<size_t>(kb)];
        std::vector<std::vector<MatrixXcd>> m(static_cast<size_t>(bj.q_rank));
        for (Index v = 0; v < bj.q_rank; ++v) {
            MatrixXcd lv = bra_lift(bj.v.col(v), r);
            for (Index u = 0; u < bj.q_rank; ++u) {
                MatrixXcd lu = bra_lift(bj.v.col(u), r);
                m[static_cast<size_t>(v)].push_back(lv * bk.rho_pad * lu.adjoint());
            }
        }
        return cross.emplace(std::make_pair(jb, kb), std::move(m)).first->second;
    };

    Index rn = 1;
    bool need_junk = false;
    for (const auto& plan : plans)
        if (plan.p_sec * (1.0 - plan.mass_q) > kJunkEps) need_junk = true;
    if (!lossless_c) need_junk = true;
    if (need_junk) {
        require_junk_feasible(r, n);
        for (Index k = 0; k < n; ++k) rn *= r;
    }
    if (!lossless_c && c_full - keep_c > 4096)
        throw DimTooLarge("classical reroute over " + std::to_string(c_full - keep_c) +
                          " sectors (cap 4096)");

    // Absolute-weight operator of one rerouted sector product, contracted
    // against the lead sector's eigenvectors at words v, u.
    auto foreign_m = [&](const std::vector<Index>& v, const std::vector<Index>& u) {
        MatrixXcd m = MatrixXcd::Zero(rn, rn);
        for (Index fidx = keep_c; fidx < c_full; ++fidx) {
            const auto& kw = sector_words[static_cast<size_t>(fidx)];
            MatrixXcd acc = MatrixXcd::Identity(1, 1);
            for (size_t k = 0; k < kw.word.size(); ++k)
                acc = la::kron(acc, cross_for(j0[k], kw.word[k])[static_cast<size_t>(
                                        v[k])][static_cast<size_t>(u[k])]);
            m += kw.weight * acc;
        }
        return m;
    };

    double f = 0.0;
    for (const auto& plan : plans) {
        SectorGram sg = sector_main(bd, plan.jseq, plan.ret, plan.p_sec);
        const bool lead = plan.jseq == j0;

        double own_junk = plan.p_sec * (1.0 - plan.mass_q);
        bool sector_junk = own_junk > kJunkEps || (lead && !lossless_c);
        if (sector_junk) {
            MatrixXcd rj = MatrixXcd::Zero(rn, rn);
            MatrixXcd own = MatrixXcd::Identity(1, 1);
            for (Index j : plan.jseq) own = la::kron(own, bd[static_cast<size_t>(j)].rho_r);
            rj = plan.p_sec * own;
            for (const auto& v : plan.ret) {
                MatrixXcd acc = MatrixXcd::Identity(1, 1);
                for (size_t k = 0; k < plan.jseq.size(); ++k)
                    acc = la::kron(acc, bd[static_cast<size_t>(plan.jseq[k])]
                                            .g[static_cast<size_t>(v[k])]);
                rj -= plan.p_sec * acc;
            }
            if (lead && !lossless_c) {
                MatrixXcd fr = MatrixXcd::Zero(rn, rn);
                for (Index fidx = keep_c; fidx < c_full; ++fidx) {
                    const auto& kw = sector_words[static_cast<size_t>(fidx)];
                    MatrixXcd acc = MatrixXcd::Identity(1, 1);
                    for (Index j : kw.word) acc = la::kron(acc, bd[static_cast<size_t>(j)].rho_r);
                    fr += kw.weight * acc;
                }
                rj += fr;
                for (const auto& v : plan.ret) rj -= foreign_m(v, v);
            }
            add_junk(bd, plan.jseq, plan.ret.front(), plan.p_sec, rj, sg);
        }

        if (lead && !lossless_c) {
            // Main branch of the rerouted content: it landed inside this
            // sector's code subspace and interferes coherently.
            std::vector<MatrixXcd> lifted;
            for (const auto& v : plan.ret) {
                MatrixXcd a = MatrixXcd::Identity(1, 1);
                for (size_t k = 0; k < plan.jseq.size(); ++k)
                    a = la::kron(a, bd[static_cast<size_t>(plan.jseq[k])]
                                        .avec[static_cast<size_t>(v[k])]);
                lifted.push_back(std::move(a));
            }
            MatrixXcd inner = MatrixXcd::Zero(sg.s, sg.s);
            for (size_t vi = 0; vi < plan.ret.size(); ++vi)
                for (size_t ui = 0; ui < plan.ret.size(); ++ui)
                    inner += lifted[vi].adjoint() * foreign_m(plan.ret[vi], plan.ret[ui]) *
                             lifted[ui];
            VectorXcd d = sg.sqrt_lam.cast<cxd>();
            sg.gram += plan.p_sec * (d.asDiagonal() * inner * d.asDiagonal());
        }
        f += trace_sqrt(sg.gram);
    }

    SimulationReport rep;
    rep.n = n;
    rep.rate_q = (region.s_c + slack) / 2.0 + region.s_q_given_c + slack;
    rep.rate_e = (region.s_c + slack) / 2.0;
    rep.fidelity = f;
    rep.typical_mass = typical_mass;
    rep.dims_used = used_dims(ki, {{"Mc", keep_c}, {"Mq", keep_q}});
    return rep;
}

SimulationReport run_assisted(const MultipartiteState& rho_ar, Index n, double slack,
                              uint64_t seed) {
    return run_assisted(ki_decompose(rho_ar, seed), n, slack);
}

SimulationReport run_schumacher_control(const MultipartiteState& rho_ar, Index n,
                                        double rate_q) {
    MultipartiteState s = rho_ar.permuted({"A", "R"});
    const Index da = s.dims().dim_of("A");
    const Index dr = s.dims().dim_of("R");

    la::HermEig e = la::eig_herm(partial_trace(s, {"A"}).matrix());
    MatrixXcd supp = MatrixXcd::Zero(da, da);
    for (Index i = 0; i < e.vals.size(); ++i)
        if (e.vals(i) > la::kSuppTol) supp += e.vecs.col(i) * e.vecs.col(i).adjoint();

    // The whole of A treated as one quantum block: no classical label, no
    // redundancy, so the pipeline degenerates to plain compression of A.
    KIBlock blk{1.0, da, 1, MultipartiteState(SystemDims{{"N", 1}}, MatrixXcd::Identity(1, 1)),
                MultipartiteState(SystemDims{{"Q", da}, {"R", dr}}, s.matrix())};
    KIDecomposition trivial{{std::move(blk)}, MatrixXcd::Identity(da, da), std::move(supp),
                            da, dr};
    return run_unassisted(trivial, n, rate_q);
}

std::string simulation_csv(const std::vector<SimulationReport>& reports) {
    std::string out = "n,rateQ,rateE,fidelity,typical_mass\n";
    char line[160];
    for (const auto& r : reports) {
        std::snprintf(line, sizeof(line), "%lld,%.17g,%.17g,%.17g,%.17g\n",
                      static_cast<long long>(r.n), r.rate_q, r.rate_e, r.fidelity,
                      r.typical_mass);
        out += line;
    }
    return out;
}

}  // namespace qki
