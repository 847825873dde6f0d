#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "qki/entropy.hpp"
#include "qki/errors.hpp"
#include "qki/ki.hpp"
#include "qki/operators.hpp"
#include "qki/rates.hpp"
#include "qki/sim.hpp"
#include "qki/state.hpp"

namespace qki {

namespace {

// The dilated state is held as a dense vector; 2^22 amplitudes is 64 MB.
constexpr double kAuditAmpCap = 4194304.0;

std::string numbered(const std::string& base, Index copy) {
    return base + std::to_string(copy + 1);
}

std::vector<std::string> numbered_all(const std::string& base, Index n) {
    std::vector<std::string> out;
    for (Index k = 0; k < n; ++k) out.push_back(numbered(base, k));
    return out;
}

std::vector<std::string> join(std::initializer_list<std::vector<std::string>> parts) {
    std::vector<std::string> out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

// Entropy of a label group, evaluated on whichever side of the pure global
// state has the smaller dimension.
double ent(const StateVector& s, const std::vector<std::string>& group) {
    Index dg = 1;
    for (const auto& l : group) dg *= s.dims().dim_of(l);
    if (dg * dg <= s.dims().total()) return s.entropy_on(group);
    return s.entropy_on(s.dims().complement(group).labels());
}

double cond(const StateVector& s, const std::vector<std::string>& x,
            const std::vector<std::string>& z) {
    return ent(s, join({x, z})) - ent(s, z);
}

double cmi(const StateVector& s, const std::vector<std::string>& x,
           const std::vector<std::string>& y, const std::vector<std::string>& z) {
    return ent(s, join({x, z})) + ent(s, join({y, z})) - ent(s, join({x, y, z})) -
           ent(s, z);
}

// |psi> = sum_j sqrt(p_j) |j>_C phi_j^{Q,R,RP} chi_j^{N,NP} |j>_{Cp} |j>_P
// on one copy's padded registers. Cp is the classical copy the converse
// conditions on; P purifies the classical correlation so the global state
// stays pure.
StateVector copy_source_vector(const KIDecomposition& ki, Index copy) {
    const Index c = ki.c_dim();
    const Index qm = ki.q_max();
    const Index nm = ki.n_max();
    const Index r = ki.dim_r;

    std::vector<StateVector> phis;
    std::vector<StateVector> chis;
    Index rp = 1, np = 1;
    for (const auto& blk : ki.blocks) {
        phis.push_back(purify_vector(blk.rho_qr, "RP"));
        chis.push_back(purify_vector(blk.omega, "NP"));
        rp = std::max(rp, phis.back().dims().dim_of("RP"));
        np = std::max(np, chis.back().dims().dim_of("NP"));
    }

    SystemDims pd(std::vector<LabeledDim>{{numbered("C", copy), c},
                                          {numbered("Q", copy), qm},
                                          {numbered("N", copy), nm},
                                          {numbered("R", copy), r},
                                          {numbered("RP", copy), rp},
                                          {numbered("NP", copy), np},
                                          {numbered("Cp", copy), c},
                                          {numbered("P", copy), c}});
    VectorXcd v = VectorXcd::Zero(pd.total());
    for (Index j = 0; j < c; ++j) {
        const auto& blk = ki.blocks[static_cast<size_t>(j)];
        const auto& phi = phis[static_cast<size_t>(j)].vector();
        const auto& chi = chis[static_cast<size_t>(j)].vector();
        const Index rj = phis[static_cast<size_t>(j)].dims().dim_of("RP");
        const Index nj = chis[static_cast<size_t>(j)].dims().dim_of("NP");
        const double amp = std::sqrt(blk.p);
        for (Index q = 0; q < blk.q_dim; ++q)
            for (Index rr = 0; rr < r; ++rr)
                for (Index rpi = 0; rpi < rj; ++rpi)
                    for (Index m = 0; m < blk.n_dim; ++m)
                        for (Index npi = 0; npi < nj; ++npi)
                            v(pd.flat({j, q, m, rr, rpi, npi, j, j})) =
                                amp * phi((q * r + rr) * rj + rpi) * chi(m * nj + npi);
    }
    return StateVector(pd, std::move(v));
}

}  // namespace

double audit_delta(Index n, double epsilon, Index dim_cq) {
    if (n < 1) throw Error("copy count must be positive");
    if (epsilon < 0.0 || epsilon > 1.0) throw Error("epsilon must lie in [0, 1]");
    const double t = std::min(1.0, std::sqrt(2.0 * epsilon));
    return t * std::log2(static_cast<double>(dim_cq)) +
           binary_entropy(t) / static_cast<double>(n);
}

std::vector<AuditRow> audit_converse_chain(const CodeInstance& code,
                                           const KIDecomposition& ki, double epsilon) {
    if (epsilon < 0.0 || epsilon > 1.0) throw Error("epsilon must lie in [0, 1]");
    const Index n = code.n;
    const Index c = ki.c_dim();
    const Index qm = ki.q_max();
    const Index nm = ki.n_max();

    std::vector<LabeledDim> triples;
    for (Index k = 0; k < n; ++k) {
        triples.push_back({numbered("C", k), c});
        triples.push_back({numbered("Q", k), qm});
        triples.push_back({numbered("N", k), nm});
    }
    if (!(code.encoder.in_dims() == SystemDims(triples)))
        throw DimMismatch("audit expects a code on n copies of the {C, Q, N} block layout");

    const Index kdim = static_cast<Index>(std::llround(std::exp2(code.log_k)));
    const Index keep = code.encoder.out_dims().total();

    StateVector first = copy_source_vector(ki, 0);
    const double per_copy = static_cast<double>(first.dims().total());
    const double cqn = static_cast<double>(c * qm * nm);
    const double t0 = std::pow(per_copy, static_cast<double>(n)) *
                      static_cast<double>(kdim) * static_cast<double>(kdim);
    const double spect = t0 / std::pow(cqn, static_cast<double>(n));
    const double t1 = spect * static_cast<double>(keep) *
                      static_cast<double>(code.encoder.kraus().size());
    const double t2 = t1 / static_cast<double>(keep) *
                      std::pow(cqn, static_cast<double>(n)) *
                      static_cast<double>(code.decoder.kraus().size());
    const double worst = std::max({t0, t1, t2});
    if (n > 3 || worst > kAuditAmpCap)
        throw DimTooLarge("converse audit on " + std::to_string(n) + " copies needs " +
                          std::to_string(static_cast<long long>(worst)) +
                          " amplitudes (cap n <= 3 and 2^22 amplitudes)");

    StateVector s0 = first;
    for (Index k = 1; k < n; ++k) s0 = tensor(s0, copy_source_vector(ki, k));
    {
        SystemDims ab(std::vector<LabeledDim>{{"A0", kdim}, {"B0", kdim}});
        VectorXcd phi = VectorXcd::Zero(kdim * kdim);
        const double amp = 1.0 / std::sqrt(static_cast<double>(kdim));
        for (Index i = 0; i < kdim; ++i) phi(i * kdim + i) = amp;
        s0 = tensor(s0, StateVector(ab, std::move(phi)));
    }
    StateVector s1 = apply(code.encoder.stinespring("W"), s0);
    StateVector s2 = apply(code.decoder.stinespring("V"), s1);

    const RateRegion reg = rate_region(ki);
    const double nn = static_cast<double>(n);
    const double delta = audit_delta(n, epsilon, c * qm);
    const double nq = code.log_m;
    const double sb0 = code.log_k;

    const auto hat_c = numbered_all("C", n);
    const auto hat_q = numbered_all("Q", n);
    const auto hat_n = numbered_all("N", n);
    const auto cps = numbered_all("Cp", n);
    const std::vector<std::string> msg{"M"};
    const std::vector<std::string> env_w{"W"};
    const std::vector<std::string> a0{"A0"};
    const std::vector<std::string> b0{"B0"};
    // our decoders leave B0 untouched, so it rides along with the decoder
    // environment in every post-decoding group
    const std::vector<std::string> env_v{"V", "B0"};

    std::vector<AuditRow> rows;
    auto bound = [&rows](const char* step, double lhs, double rhs) {
        rows.push_back({step, lhs, rhs, lhs - rhs});
    };
    auto ident = [&rows](const char* step, double lhs, double rhs) {
        rows.push_back({step, lhs, rhs, -std::abs(lhs - rhs)});
    };

    // decoding chain
    const double s1_m = ent(s1, msg);
    const double s1_b0 = ent(s1, b0);
    const double s1_mb0 = ent(s1, join({msg, b0}));
    const double s2_out = ent(s2, join({hat_c, hat_n, hat_q, env_v}));
    const double s2_cq = ent(s2, join({hat_c, hat_q}));
    const double s2_nv_cq = cond(s2, join({hat_n, env_v}), join({hat_c, hat_q}));
    const double s2_nv_cqcp = cond(s2, join({hat_n, env_v}), join({hat_c, hat_q, cps}));
    const double s2_nv_cp = cond(s2, join({hat_n, env_v}), cps);
    const double cmi_nv = cmi(s2, join({hat_n, env_v}), join({hat_c, hat_q}), cps);
    const double cmi_nvw = cmi(s2, join({hat_n, env_v, env_w}), join({hat_c, hat_q}), cps);

    bound("dec_dim_bound", nq + sb0, s1_m + s1_b0);
    bound("dec_subadditivity", s1_m + s1_b0, s1_mb0);
    ident("dec_decoder_isometry", s1_mb0, s2_out);
    ident("dec_chain_rule", s2_out, s2_cq + s2_nv_cq);
    bound("dec_continuity", s2_cq, nn * reg.s_cq - nn * delta);
    bound("dec_conditioning", s2_nv_cq, s2_nv_cqcp);
    ident("dec_cmi_identity", s2_nv_cqcp, s2_nv_cp - cmi_nv);
    bound("dec_data_processing", cmi_nvw, cmi_nv);
    bound("dec_total", nq + sb0, nn * reg.s_cq - cmi_nvw + s2_nv_cp - nn * delta);

    // encoding chain; identities are evaluated with the two sides grouped
    // differently so the comparison is not vacuous
    const double s0_a0 = ent(s0, a0);
    const double s0_cnq = ent(s0, join({hat_c, hat_n, hat_q}));
    const double s0_cnqcp = ent(s0, join({hat_c, hat_n, hat_q, cps}));
    const double s0_cnqa0cp = ent(s0, join({hat_c, hat_n, hat_q, a0, cps}));
    const double s1_cp = ent(s1, cps);
    const double s1_wcp = ent(s1, join({env_w, cps}));
    const double s1_mwcp = ent(s1, join({msg, env_w, cps}));
    const double s1_m_wcp = ent(s1, join({env_w, cps, msg})) - s1_wcp;
    const double s1_w_cp = ent(s1, join({cps, env_w})) - s1_cp;
    const double omega_n_cq =
        conditional_entropy(assemble_omega(ki), {"N"}, {"C", "Q"});

    bound("enc_dim_bound", nq, s1_m);
    bound("enc_conditioning", s1_m, s1_m_wcp);
    ident("enc_chain_rule", s1_m_wcp, s1_mwcp - s1_wcp);
    ident("enc_encoder_isometry", s1_mwcp, s0_cnqa0cp);
    ident("enc_ancilla_independence", s0_cnqa0cp, s0_cnqcp + s0_a0);
    ident("enc_chain_rule_w", s1_wcp, s1_cp + s1_w_cp);
    ident("enc_copy_redundancy", s0_cnqcp, s0_cnq);
    ident("enc_product_additivity", s0_cnq, nn * reg.s_cnq);
    ident("enc_block_structure", omega_n_cq, reg.s_n_given_c);
    bound("enc_total", nq,
          nn * reg.s_cnq + s0_a0 - s1_cp - s1_w_cp);

    // combined bounds
    const double s2_nv_wcp = cond(s2, join({hat_n, env_v}), join({env_w, cps}));
    const double s2_nvw_cp = cond(s2, join({hat_n, env_v, env_w}), cps);
    bound("env_balance", s2_nv_cp + s2_nv_wcp, 0.0);
    bound("q_rate_bound", nq / nn,
          reg.s_cq - reg.s_c / 2.0 + reg.s_n_given_c / 2.0 - cmi_nvw / (2.0 * nn) -
              s2_nvw_cp / (2.0 * nn) - delta / 2.0);
    bound("classical_env_positivity", s2_nv_cp, 0.0);
    bound("sum_rate_bound", nq + sb0, nn * reg.s_cq - cmi_nvw - nn * delta);
    rows.push_back({"delta_per_copy", delta, delta, 0.0});
    return rows;
}

std::string audit_csv(const std::vector<AuditRow>& rows) {
    std::string out = "step,lhs,rhs,slack\n";
    char line[192];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof(line), "%s,%.17g,%.17g,%.17g\n", r.step.c_str(),
                      r.lhs, r.rhs, r.slack);
        out += line;
    }
    return out;
}

double min_slack(const std::vector<AuditRow>& rows) {
    double worst = 0.0;
    for (const auto& r : rows) worst = std::min(worst, r.slack);
    return worst;
}

void require_audit_slack(const std::vector<AuditRow>& rows, double tol) {
    for (const auto& r : rows)
        if (r.slack < -tol)
            throw SlackViolation("audit step " + r.step + " has slack " +
                                 std::to_string(r.slack));
}

}  // namespace qki
