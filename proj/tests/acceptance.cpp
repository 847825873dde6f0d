// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion is independent and states its tolerance inline.
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "qki/bounds.hpp"
#include "qki/entropy.hpp"
#include "qki/errors.hpp"
#include "qki/ki.hpp"
#include "qki/random.hpp"
#include "qki/rates.hpp"
#include "qki/sim.hpp"
#include "qki/state.hpp"
#include "qki/state_io.hpp"

using namespace qki;

namespace {

namespace fs = std::filesystem;

const fs::path kScratch = "acceptance_scratch";

std::string str(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

MultipartiteState bell_pair() {
    MatrixXcd m = MatrixXcd::Zero(4, 4);
    m(0, 0) = m(0, 3) = m(3, 0) = m(3, 3) = 0.5;
    return MultipartiteState(SystemDims({{"A", 2}, {"R", 2}}), m);
}

MultipartiteState fair_bit() {
    MatrixXcd m = MatrixXcd::Zero(4, 4);
    m(0, 0) = m(3, 3) = 0.5;
    return MultipartiteState(SystemDims({{"A", 2}, {"R", 2}}), m);
}

// A = Q x N: entangled pure rho^{QR} with Q spectrum {q0, 1-q0} next to an
// independent diag(w0, 1-w0) redundant factor.
MultipartiteState one_block_source(double q0, double w0) {
    SystemDims dqr({{"Q", 2}, {"R", 2}});
    VectorXcd psi = VectorXcd::Zero(4);
    psi(0) = std::sqrt(q0);
    psi(3) = std::sqrt(1.0 - q0);
    MultipartiteState qr(dqr, psi * psi.adjoint());
    MatrixXcd w = MatrixXcd::Zero(2, 2);
    w(0, 0) = w0;
    w(1, 1) = 1.0 - w0;
    auto joint = tensor(qr, MultipartiteState(SystemDims({{"N", 2}}), w));
    auto perm = joint.permuted({"Q", "N", "R"});
    return MultipartiteState(SystemDims({{"A", 4}, {"R", 2}}), perm.matrix());
}

MultipartiteState mixed_redundancy_state() {
    return synth_ki_state({{0.5, 1, 2}, {0.5, 1, 2}}, 2, 31).first;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(QKI_CLI_PATH) + " " + args + " > " +
                            (kScratch / "cli.log").string() + " 2>&1";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

// 100 randomized sources: exact block-dimension multiset, weights to 1e-8,
// reconstruction fidelity to 1e-9, under 60 seconds end to end.
bool crit_block_recovery(std::string& detail) {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 gen(2026);
    double worst_p = 0.0;
    double worst_f = 1.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int b = 1 + static_cast<int>(gen() % 3);
        std::vector<std::pair<Index, Index>> dims;
        for (int guard = 0; guard < 1000; ++guard) {
            dims.clear();
            Index total = 0;
            for (int j = 0; j < b; ++j) {
                const Index q = 1 + static_cast<Index>(gen() % 3);
                const Index n = 1 + static_cast<Index>(gen() % 3);
                dims.push_back({q, n});
                total += q * n;
            }
            if (total <= 6) break;
        }
        std::vector<int> weights(9);
        std::iota(weights.begin(), weights.end(), 1);
        std::shuffle(weights.begin(), weights.end(), gen);
        const double wsum = std::accumulate(weights.begin(), weights.begin() + b, 0.0);
        std::vector<BlockSpec> spec;
        for (int j = 0; j < b; ++j) {
            spec.push_back({weights[j] / wsum, dims[j].first, dims[j].second});
        }
        const Index dim_r = 2 + static_cast<Index>(gen() % 3);
        const auto made = synth_ki_state(spec, dim_r, 1000 + trial);
        const KIDecomposition ki = ki_decompose(made.first);

        if (ki.c_dim() != b) {
            detail = "trial " + std::to_string(trial) + ": expected " + std::to_string(b) +
                     " blocks, got " + std::to_string(ki.c_dim());
            return false;
        }
        std::sort(spec.begin(), spec.end(), [](const BlockSpec& x, const BlockSpec& y) {
            if (x.p != y.p) return x.p > y.p;
            if (x.q_dim != y.q_dim) return x.q_dim > y.q_dim;
            return x.n_dim > y.n_dim;
        });
        for (int j = 0; j < b; ++j) {
            if (ki.blocks[j].q_dim != spec[j].q_dim || ki.blocks[j].n_dim != spec[j].n_dim) {
                detail = "trial " + std::to_string(trial) + ": block " + std::to_string(j) +
                         " dims (" + std::to_string(ki.blocks[j].q_dim) + "," +
                         std::to_string(ki.blocks[j].n_dim) + ") vs (" +
                         std::to_string(spec[j].q_dim) + "," + std::to_string(spec[j].n_dim) +
                         ")";
                return false;
            }
            worst_p = std::max(worst_p, std::abs(ki.blocks[j].p - spec[j].p));
        }
        worst_f = std::min(worst_f, fidelity(reconstruct(ki), made.first));
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    detail = "weight err " + str(worst_p) + ", fidelity " + str(worst_f) + ", " +
             str(secs) + "s";
    return worst_p <= 1e-8 && worst_f >= 1.0 - 1e-9 && secs < 60.0;
}

bool crit_canonical_sources(std::string& detail) {
    const KIDecomposition bell = ki_decompose(bell_pair());
    if (bell.c_dim() != 1 || bell.blocks[0].q_dim != 2 || bell.blocks[0].n_dim != 1) {
        detail = "entangled pair structure";
        return false;
    }
    const RateRegion bell_reg = rate_region(bell);
    if (std::abs(bell_reg.corner_unassisted.e) > 1e-9 ||
        std::abs(bell_reg.corner_unassisted.q - 1.0) > 1e-9) {
        detail = "entangled pair corner";
        return false;
    }

    const KIDecomposition prod = ki_decompose(synth_ki_state({{1.0, 1, 3}}, 2, 11).first);
    if (prod.c_dim() != 1 || prod.blocks[0].q_dim != 1 || prod.blocks[0].n_dim != 3) {
        detail = "product source structure";
        return false;
    }
    const RateRegion prod_reg = rate_region(prod);
    if (std::abs(prod_reg.s_cq) > 1e-9 || std::abs(prod_reg.corner_assisted.q) > 1e-9 ||
        std::abs(prod_reg.corner_assisted.e) > 1e-9) {
        detail = "product source rates";
        return false;
    }

    const KIDecomposition fair = ki_decompose(fair_bit());
    if (fair.c_dim() != 2 || fair.blocks[0].q_dim != 1 || fair.blocks[0].n_dim != 1 ||
        fair.blocks[1].q_dim != 1 || fair.blocks[1].n_dim != 1 ||
        std::abs(fair.blocks[0].p - 0.5) > 1e-9) {
        detail = "fair bit structure";
        return false;
    }
    const RateRegion fair_reg = rate_region(fair);
    const bool fair_ok = std::abs(fair_reg.s_c - 1.0) <= 1e-9 &&
                         std::abs(fair_reg.s_cq - 1.0) <= 1e-9 &&
                         std::abs(fair_reg.corner_unassisted.e) <= 1e-9 &&
                         std::abs(fair_reg.corner_unassisted.q - 1.0) <= 1e-9 &&
                         std::abs(fair_reg.corner_assisted.e - 0.5) <= 1e-9 &&
                         std::abs(fair_reg.corner_assisted.q - 0.5) <= 1e-9;
    if (!fair_ok) {
        detail = "fair bit entropies or corners";
        return false;
    }
    detail = "entangled pair, product, fair bit all match";
    return true;
}

bool crit_redundancy_advantage(std::string& detail) {
    const MultipartiteState rho = mixed_redundancy_state();
    const KIDecomposition ki = ki_decompose(rho);
    double direct = 0.0;
    for (const auto& blk : ki.blocks) direct += blk.p * entropy_of(blk.omega, {"N"});
    const double gap_err = std::abs(schumacher_gap(ki) - direct);
    const double rate = rate_region(ki).s_cq + 0.25;
    const double proto = run_unassisted(ki, 6, rate).fidelity;
    const double control = run_schumacher_control(rho, 6, rate).fidelity;
    detail = "gap err " + str(gap_err) + "; fidelity " + str(proto) + " vs control " +
             str(control) + " at rate " + str(rate);
    return gap_err <= 1e-9 && proto > control;
}

bool crit_fidelity_trend(std::string& detail) {
    const KIDecomposition ki = ki_decompose(one_block_source(0.77, 0.6));
    const double rate = rate_region(ki).s_cq + 0.25;
    double prev = 0.0;
    for (Index n : {2, 4, 6, 8}) {
        const double f = run_unassisted(ki, n, rate).fidelity;
        if (f < prev - 1e-9) {
            detail = "fidelity decreased at n = " + std::to_string(n);
            return false;
        }
        prev = f;
    }
    const double full = run_unassisted(ki, 8, 1.0).fidelity;
    detail = "fidelity " + str(prev) + " at n = 8, " + str(full) + " at full rate";
    return prev > 0.85 && std::abs(full - 1.0) <= 1e-8;
}

bool crit_converse_audits(std::string& detail) {
    double worst = 0.0;
    const std::vector<std::pair<const char*, MultipartiteState>> sources = {
        {"bell", bell_pair()}, {"fair", fair_bit()}};
    for (const auto& [name, rho] : sources) {
        const KIDecomposition ki = ki_decompose(rho);
        const double rate = std::log2(static_cast<double>(ki.c_dim() * ki.q_max()));
        for (Index n : {2, 3}) {
            const CodeInstance code = protocol_code(ki, n, rate);
            const double eps = std::max(0.0, 1.0 - code_fidelity(code, ki));
            const auto rows = audit_converse_chain(code, ki, eps);
            worst = std::min(worst, min_slack(rows));
        }
    }
    fs::create_directories(kScratch);
    save_state(bell_pair(), (kScratch / "bell.json").string());
    save_state(fair_bit(), (kScratch / "fair.json").string());
    const int rc_bell = run_cli("audit " + (kScratch / "bell.json").string() +
                                " --n 2 --rate full --out " +
                                (kScratch / "bell_audit.csv").string());
    const int rc_fair = run_cli("audit " + (kScratch / "fair.json").string() +
                                " --n 3 --rate full --out " +
                                (kScratch / "fair_audit.csv").string());
    detail = "min slack " + str(worst) + " over 4 audits; audit command exits " +
             std::to_string(rc_bell) + " and " + std::to_string(rc_fair);
    return worst >= -1e-8 && rc_bell == 0 && rc_fair == 0;
}

bool crit_leakage_functionals(std::string& detail) {
    const KIDecomposition ki = ki_decompose(mixed_redundancy_state());
    const double s_n_given_c = rate_region(ki).s_n_given_c;
    const BoundBudget budget{3, 20};

    const BoundEstimate j0 = estimate(ki, 0.0, BoundKind::J, budget, 2);
    const BoundEstimate z0 = estimate(ki, 0.0, BoundKind::Z, budget, 2);
    const double j_err = std::abs(j0.j_value);
    const double z_err = std::abs(z0.z_value - s_n_given_c);
    if (!(j0.feasible() && z0.feasible() && j_err <= 1e-6 && z_err <= 1e-6)) {
        detail = "zero-slack values: J err " + str(j_err) + ", Z err " + str(z_err);
        return false;
    }

    const std::vector<double> eps = {0.0, 0.15, 0.3};
    for (BoundKind kind : {BoundKind::J, BoundKind::Z}) {
        const auto env = envelope(ki, eps, kind, budget, 11);
        for (std::size_t i = 1; i < env.size(); ++i) {
            if (env[i].value() < env[i - 1].value() - 1e-12) {
                detail = "envelope decreased between slack grid points";
                return false;
            }
        }
    }

    const KIDecomposition ka = ki_decompose(fair_bit());
    const KIDecomposition prod = tensor_decomposition(ka, ki);
    const BoundEstimate ea = estimate(ka, 0.15, BoundKind::J, budget, 7);
    const BoundEstimate eb = estimate(ki, 0.2, BoundKind::J, budget, 9);
    const BoundEstimate comb = tensor_feasible(ea, ka, eb, ki);
    const ObjectiveValue j_prod = objective(comb.ansatz, prod, BoundKind::J);
    const ObjectiveValue z_prod = objective(comb.ansatz, prod, BoundKind::Z);
    const double add_j = std::abs(j_prod.value - (ea.j_value + eb.j_value));
    const double add_z = std::abs(z_prod.value - (ea.z_value + eb.z_value));
    const double mult = std::abs(j_prod.fidelity -
                                 ea.achieved_fidelity * eb.achieved_fidelity);
    detail = "zero-slack errs " + str(j_err) + "/" + str(z_err) + "; additivity " +
             str(add_j) + "/" + str(add_z) + "; multiplicativity " + str(mult);
    return add_j <= 1e-9 && add_z <= 1e-9 && mult <= 1e-9;
}

bool crit_metric_identities(std::string& detail) {
    Rng rng(777);
    double worst_low = 0.0;
    double worst_high = 0.0;
    for (int i = 0; i < 200; ++i) {
        const Index d = 2 + static_cast<Index>(rng() % 3);
        const SystemDims dims({{"A", d}});
        const MultipartiteState rho = random_state(dims, rng);
        const MultipartiteState xi = random_state(dims, rng);
        const double f = fidelity(rho, xi);
        const double t = trace_distance(rho, xi);
        worst_low = std::max(worst_low, (1.0 - f) - t);
        worst_high = std::max(worst_high, t - std::sqrt(std::max(0.0, 1.0 - f * f)));
    }
    if (worst_low > 1e-9 || worst_high > 1e-9) {
        detail = "distance bounds violated by " + str(std::max(worst_low, worst_high));
        return false;
    }

    double worst_ssa = 0.0;
    for (int i = 0; i < 200; ++i) {
        const Index da = 2 + static_cast<Index>(rng() % 2);
        const Index db = 2 + static_cast<Index>(rng() % 2);
        const Index dc = 2;
        const MultipartiteState s =
            random_state(SystemDims({{"A", da}, {"B", db}, {"C", dc}}), rng);
        worst_ssa =
            std::min(worst_ssa, conditional_mutual_information(s, {"A"}, {"C"}, {"B"}));
    }
    if (worst_ssa < -1e-9) {
        detail = "conditional mutual information dipped to " + str(worst_ssa);
        return false;
    }

    double worst_add = 0.0;
    for (int i = 0; i < 50; ++i) {
        const MultipartiteState a =
            random_state(SystemDims({{"A", 2 + static_cast<Index>(rng() % 3)}}), rng);
        const MultipartiteState b =
            random_state(SystemDims({{"B", 2 + static_cast<Index>(rng() % 3)}}), rng);
        const double err =
            std::abs(entropy_bits(tensor(a, b)) - entropy_bits(a) - entropy_bits(b));
        worst_add = std::max(worst_add, err);
    }
    detail = "bound slack " + str(std::max(worst_low, worst_high)) + ", min cmi " +
             str(worst_ssa) + ", additivity err " + str(worst_add);
    return worst_add <= 1e-9;
}

struct Criterion {
    const char* name;
    bool (*run)(std::string&);
};

}  // namespace

int main() {
    const std::vector<Criterion> gate = {
        {"block structure recovery on 100 randomized sources", crit_block_recovery},
        {"canonical sources decompose to known structure and rates", crit_canonical_sources},
        {"redundancy gap and advantage over plain typical coding", crit_redundancy_advantage},
        {"two-level register fidelity trend and lossless full rate", crit_fidelity_trend},
        {"converse chain audits clear on two sources at n = 2 and 3", crit_converse_audits},
        {"leakage functionals: exact anchors, monotone envelopes, additivity",
         crit_leakage_functionals},
        {"distance bounds, strong subadditivity, entropy additivity", crit_metric_identities},
    };
    int failures = 0;
    for (std::size_t i = 0; i < gate.size(); ++i) {
        std::string detail;
        bool ok = false;
        try {
            ok = gate[i].run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        if (!ok) ++failures;
        std::printf("%s criterion %zu: %s [%s]\n", ok ? "PASS" : "FAIL", i + 1,
                    gate[i].name, detail.c_str());
    }
    if (failures == 0) {
        std::printf("acceptance: all %zu criteria passed\n", gate.size());
    } else {
        std::printf("acceptance: %d of %zu criteria FAILED\n", failures, gate.size());
    }
    return failures == 0 ? 0 : 1;
}
