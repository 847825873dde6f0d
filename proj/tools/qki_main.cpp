#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qki/bounds.hpp"
#include "qki/entropy.hpp"
#include "qki/errors.hpp"
#include "qki/ki.hpp"
#include "qki/random.hpp"
#include "qki/rates.hpp"
#include "qki/sim.hpp"
#include "qki/state.hpp"
#include "qki/state_io.hpp"

namespace {

using qki::Index;

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw qki::Error("cannot open output file: " + path);
    out << text;
    if (!out) throw qki::Error("failed writing output file: " + path);
}

// Qubit rate per copy. The token "full" means the whole coded register,
// log2(|C| * max_j d_j), which makes the unassisted protocol lossless.
double parse_rate(const std::string& text, const qki::KIDecomposition& ki) {
    if (text == "full") {
        return std::log2(static_cast<double>(ki.c_dim() * ki.q_max()));
    }
    std::size_t pos = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &pos);
    } catch (...) {
        pos = 0;
    }
    if (pos != text.size() || text.empty()) {
        throw qki::Error("--rate must be a number or 'full', got '" + text + "'");
    }
    return value;
}

int cmd_decompose(const std::string& input, const std::string& out, std::uint64_t seed) {
    const qki::MultipartiteState rho = qki::load_state(input);
    const qki::KIDecomposition ki = qki::ki_decompose(rho, seed);
    const double f = qki::fidelity(qki::reconstruct(ki), rho);
    std::printf("blocks: %lld\n", static_cast<long long>(ki.c_dim()));
    std::printf("%4s %12s %6s %6s\n", "j", "p_j", "d_j", "m_j");
    for (std::size_t j = 0; j < ki.blocks.size(); ++j) {
        std::printf("%4zu %12.9f %6lld %6lld\n", j, ki.blocks[j].p,
                    static_cast<long long>(ki.blocks[j].q_dim),
                    static_cast<long long>(ki.blocks[j].n_dim));
    }
    std::printf("reconstruction fidelity: %.12f\n", f);
    qki::save_ki(ki, out);
    std::printf("wrote %s\n", out.c_str());
    return 0;
}

int cmd_rates(const std::string& input, const std::string& out, int samples) {
    const qki::KIDecomposition ki = qki::load_ki(input);
    const qki::RateRegion reg = qki::rate_region(ki);
    std::printf("S(C)      = %.9f\n", reg.s_c + 0.0);
    std::printf("S(CQ)     = %.9f\n", reg.s_cq + 0.0);
    std::printf("S(N|C)    = %.9f\n", reg.s_n_given_c + 0.0);
    std::printf("unassisted corner (E, Q) = (%.9f, %.9f)\n", reg.corner_unassisted.e + 0.0,
                reg.corner_unassisted.q + 0.0);
    std::printf("assisted corner   (E, Q) = (%.9f, %.9f)\n", reg.corner_assisted.e + 0.0,
                reg.corner_assisted.q + 0.0);
    std::printf("schumacher gap = %.9f\n", qki::schumacher_gap(ki) + 0.0);
    write_text(out, qki::region_boundary_csv(reg, samples));
    std::printf("wrote %s\n", out.c_str());
    return 0;
}

int cmd_simulate(const std::string& input, const std::string& out, const std::string& mode,
                 const std::vector<long long>& ns, const std::string& rate_text,
                 bool have_slack, double slack, std::uint64_t seed) {
    const qki::MultipartiteState rho = qki::load_state(input);
    const qki::KIDecomposition ki = qki::ki_decompose(rho, seed);
    const bool have_rate = !rate_text.empty();

    std::vector<qki::SimulationReport> reports;
    reports.reserve(ns.size());
    for (long long n : ns) {
        if (mode == "assisted") {
            if (have_rate) throw qki::Error("assisted mode takes --slack, not --rate");
            if (!have_slack) throw qki::Error("assisted mode needs --slack");
            reports.push_back(qki::run_assisted(ki, n, slack));
        } else {
            if (have_rate && have_slack) {
                throw qki::Error("give either --rate or --slack, not both");
            }
            double rate_q = 0.0;
            if (have_rate) {
                rate_q = parse_rate(rate_text, ki);
            } else if (have_slack) {
                rate_q = qki::rate_region(ki).s_cq + slack;
            } else {
                throw qki::Error("simulate needs --rate or --slack");
            }
            if (mode == "unassisted") {
                reports.push_back(qki::run_unassisted(ki, n, rate_q));
            } else {
                reports.push_back(qki::run_schumacher_control(rho, n, rate_q));
            }
        }
        const qki::SimulationReport& r = reports.back();
        std::printf("n=%lld rateQ=%.6f rateE=%.6f fidelity=%.12f typical_mass=%.12f\n",
                    static_cast<long long>(r.n), r.rate_q, r.rate_e, r.fidelity,
                    r.typical_mass);
    }
    write_text(out, qki::simulation_csv(reports));
    std::printf("wrote %s\n", out.c_str());
    return 0;
}

int cmd_bounds(const std::string& input, const std::string& out,
               const std::string& ansatz_out, const std::vector<double>& epsilons,
               long long restarts, long long iters, std::uint64_t seed) {
    const qki::MultipartiteState rho = qki::load_state(input);
    const qki::KIDecomposition ki = qki::ki_decompose(rho, seed);
    const qki::BoundBudget budget{static_cast<Index>(restarts), static_cast<Index>(iters)};
    const auto j_env = qki::envelope(ki, epsilons, qki::BoundKind::J, budget, seed);
    const auto z_env = qki::envelope(ki, epsilons, qki::BoundKind::Z, budget, seed);
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        std::printf("eps=%-10.6g J>=%.9f Z>=%.9f fidelity=%.12f\n", epsilons[i],
                    j_env[i].j_value, z_env[i].z_value,
                    std::min(j_env[i].achieved_fidelity, z_env[i].achieved_fidelity));
    }
    write_text(out, qki::bounds_csv(j_env, z_env));
    std::printf("wrote %s\n", out.c_str());
    if (!ansatz_out.empty()) {
        nlohmann::json doc;
        doc["J"] = nlohmann::json::parse(qki::ansatz_to_json(j_env.back().ansatz));
        doc["Z"] = nlohmann::json::parse(qki::ansatz_to_json(z_env.back().ansatz));
        write_text(ansatz_out, doc.dump(2) + "\n");
        std::printf("wrote %s\n", ansatz_out.c_str());
    }
    return 0;
}

int cmd_audit(const std::string& input, const std::string& out, long long n,
              const std::string& rate_text, double tol, std::uint64_t seed) {
    const qki::MultipartiteState rho = qki::load_state(input);
    const qki::KIDecomposition ki = qki::ki_decompose(rho, seed);
    const double rate_q = parse_rate(rate_text, ki);
    const qki::CodeInstance code = qki::protocol_code(ki, n, rate_q);
    const double epsilon = std::max(0.0, 1.0 - qki::code_fidelity(code, ki));
    const auto rows = qki::audit_converse_chain(code, ki, epsilon);
    write_text(out, qki::audit_csv(rows));
    std::printf("epsilon = %.12g\n", epsilon);
    for (const auto& row : rows) {
        if (row.step == "delta_per_copy") std::printf("delta(n, epsilon) = %.12g\n", row.lhs);
    }
    std::printf("min slack = %.12g\n", qki::min_slack(rows));
    std::printf("wrote %s\n", out.c_str());
    qki::require_audit_slack(rows, tol);
    std::printf("all %zu steps clear\n", rows.size());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"block structure, rate region, and protocol audits for bipartite sources"};
    app.require_subcommand(1);

    std::uint64_t seed = qki::default_seed();
    double tol = 1e-8;

    std::string dec_input;
    std::string dec_out = "decomp.json";
    auto* dec = app.add_subcommand("decompose", "split a state into classical, quantum, "
                                                "and redundant parts");
    dec->add_option("input", dec_input, "state JSON file")->required();
    dec->add_option("--out", dec_out, "output decomposition JSON");
    dec->add_option("--seed", seed, "rng seed");

    std::string rates_input;
    std::string rates_out = "rates.csv";
    int rates_samples = 64;
    auto* rates = app.add_subcommand("rates", "entropies and rate-region corners");
    rates->add_option("input", rates_input, "decomposition JSON file")->required();
    rates->add_option("--out", rates_out, "output boundary CSV");
    rates->add_option("--samples", rates_samples, "boundary sample count")
        ->check(CLI::PositiveNumber);

    std::string sim_input;
    std::string sim_out = "simulate.csv";
    std::string sim_mode = "unassisted";
    std::string sim_rate;
    double sim_slack = 0.0;
    std::vector<long long> sim_ns{2};
    auto* sim = app.add_subcommand("simulate", "run the compression protocol at finite "
                                               "block lengths");
    sim->add_option("input", sim_input, "state JSON file")->required();
    sim->add_option("--out", sim_out, "output report CSV");
    sim->add_option("--n", sim_ns, "block lengths, comma separated")->delimiter(',');
    sim->add_option("--mode", sim_mode, "unassisted | assisted | schumacher")
        ->check(CLI::IsMember({"unassisted", "assisted", "schumacher"}));
    sim->add_option("--rate", sim_rate, "qubit rate per copy, or 'full'");
    auto* sim_slack_opt = sim->add_option("--slack", sim_slack,
                                          "rate slack above S(CQ) (assisted: ebit slack)");
    sim->add_option("--seed", seed, "rng seed");

    std::string bounds_input;
    std::string bounds_out = "bounds.csv";
    std::string bounds_ansatz_out;
    std::vector<double> bounds_eps;
    long long bounds_restarts = 6;
    long long bounds_iters = 40;
    auto* bounds = app.add_subcommand("bounds", "numerical lower envelopes for the leakage "
                                                "functionals");
    bounds->add_option("input", bounds_input, "state JSON file")->required();
    bounds->add_option("--out", bounds_out, "output envelope CSV");
    bounds->add_option("--epsilons", bounds_eps, "fidelity slacks, comma separated, sorted")
        ->delimiter(',')
        ->required();
    bounds->add_option("--restarts", bounds_restarts, "search restarts per epsilon")
        ->check(CLI::PositiveNumber);
    bounds->add_option("--iters", bounds_iters, "iterations per restart")
        ->check(CLI::PositiveNumber);
    bounds->add_option("--ansatz-out", bounds_ansatz_out,
                       "also write the final isometries as JSON");
    bounds->add_option("--seed", seed, "rng seed");

    std::string audit_input;
    std::string audit_out = "audit.csv";
    std::string audit_rate = "full";
    long long audit_n = 2;
    auto* audit = app.add_subcommand("audit", "check every inequality of the converse "
                                              "chain on a concrete code");
    audit->add_option("input", audit_input, "state JSON file")->required();
    audit->add_option("--out", audit_out, "output chain CSV");
    audit->add_option("--n", audit_n, "block length (at most 3)");
    audit->add_option("--rate", audit_rate, "qubit rate per copy, or 'full'");
    audit->add_option("--tol", tol, "slack tolerance");
    audit->add_option("--seed", seed, "rng seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (dec->parsed()) return cmd_decompose(dec_input, dec_out, seed);
        if (rates->parsed()) return cmd_rates(rates_input, rates_out, rates_samples);
        if (sim->parsed()) {
            return cmd_simulate(sim_input, sim_out, sim_mode, sim_ns, sim_rate,
                                sim_slack_opt->count() > 0, sim_slack, seed);
        }
        if (bounds->parsed()) {
            return cmd_bounds(bounds_input, bounds_out, bounds_ansatz_out, bounds_eps,
                              bounds_restarts, bounds_iters, seed);
        }
        if (audit->parsed()) {
            return cmd_audit(audit_input, audit_out, audit_n, audit_rate, tol, seed);
        }
    } catch (const qki::SlackViolation& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 5;
    } catch (const qki::DimTooLarge& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const qki::VerificationFailed& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const qki::DegenerateCenterSplit& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const qki::IrreducibilityFailure& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const qki::NoFeasiblePoint& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const qki::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
