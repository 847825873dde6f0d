#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "qki/entropy.hpp"
#include "qki/errors.hpp"
#include "qki/ki.hpp"
#include "qki/rates.hpp"
#include "qki/sim.hpp"

using namespace qki;

namespace {

MultipartiteState bell_pair() {
    SystemDims d({{"A", 2}, {"R", 2}});
    VectorXcd v = VectorXcd::Zero(4);
    v(0) = v(3) = 1.0 / std::sqrt(2.0);
    return MultipartiteState(d, v * v.adjoint());
}

MultipartiteState fair_bit() {
    SystemDims d({{"A", 2}, {"R", 2}});
    MatrixXcd m = MatrixXcd::Zero(4, 4);
    m(0, 0) = m(3, 3) = 0.5;
    return MultipartiteState(d, m);
}

std::map<std::string, AuditRow> by_step(const std::vector<AuditRow>& rows) {
    std::map<std::string, AuditRow> out;
    for (const auto& r : rows) out[r.step] = r;
    return out;
}

std::vector<AuditRow> audited(const MultipartiteState& src, Index n, double rate) {
    auto ki = ki_decompose(src);
    auto code = protocol_code(ki, n, rate);
    const double eps = std::max(0.0, 1.0 - code_fidelity(code, ki));
    return audit_converse_chain(code, ki, eps);
}

}  // namespace

TEST_CASE("audit_delta: vanishes at zero error and grows with it") {
    CHECK(audit_delta(2, 0.0, 4) == 0.0);
    CHECK(audit_delta(2, 0.02, 4) ==
          doctest::Approx(0.2 * 2.0 + binary_entropy(0.2) / 2.0).epsilon(1e-12));
    CHECK(audit_delta(3, 0.9, 4) ==
          doctest::Approx(std::log2(4.0) + 0.0 / 3.0).epsilon(1e-12));  // sqrt(2e) clamps to 1
    CHECK(audit_delta(2, 0.5, 4) > audit_delta(2, 0.1, 4));
    CHECK_THROWS_AS(audit_delta(2, -0.1, 4), Error);
}

TEST_CASE("converse audit: lossless entangled pair satisfies every step tightly") {
    auto rows = audited(bell_pair(), 2, 1.0);
    CHECK(rows.size() == 24);
    CHECK(min_slack(rows) >= -1e-8);
    require_audit_slack(rows);

    auto m = by_step(rows);
    // the encoded message really holds two qubits and the decoded marginal
    // recovers the full two-copy entropy; the continuity allowance is the
    // residual eigenvalue noise of an exact run, amplified by the sqrt in
    // the allowance formula
    CHECK(m["dec_dim_bound"].lhs == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(m["dec_dim_bound"].slack == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(m["dec_continuity"].slack >= -1e-8);
    CHECK(m["dec_continuity"].slack < 1e-5);
    CHECK(m["delta_per_copy"].lhs < 1e-5);
    CHECK(m["enc_product_additivity"].rhs == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("converse audit: lossy entangled pair still clears every step") {
    auto ki = ki_decompose(bell_pair());
    auto code = protocol_code(ki, 2, 0.5);
    const double eps = std::max(0.0, 1.0 - code_fidelity(code, ki));
    CHECK(eps > 1e-3);
    auto rows = audit_converse_chain(code, ki, eps);
    CHECK(min_slack(rows) >= -1e-8);
    auto m = by_step(rows);
    CHECK(m["delta_per_copy"].lhs > 0.0);
    // one qubit for two copies against the rate bound weakened by delta
    CHECK(m["q_rate_bound"].lhs == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("converse audit: classical source at three copies") {
    auto rows = audited(fair_bit(), 3, 1.0);
    CHECK(min_slack(rows) >= -1e-8);
    auto m = by_step(rows);
    CHECK(m["enc_dim_bound"].lhs == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(m["enc_dim_bound"].slack == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(m["enc_block_structure"].slack == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("converse audit: redundant factor in play, lossless and lossy") {
    auto [state, ki] = synth_ki_state({{0.7, 1, 2}, {0.3, 1, 1}}, 1, 23);
    for (double rate : {1.0, 0.5}) {
        auto code = protocol_code(ki, 2, rate);
        const double eps = std::max(0.0, 1.0 - code_fidelity(code, ki));
        auto rows = audit_converse_chain(code, ki, eps);
        CHECK(min_slack(rows) >= -1e-8);
        auto m = by_step(rows);
        // the environment-balance inequality is the strong-subadditivity step
        CHECK(m["env_balance"].slack >= -1e-8);
        CHECK(m["enc_block_structure"].slack >= -1e-8);
    }
}

TEST_CASE("converse audit: copy cap and amplitude cap") {
    auto ki = ki_decompose(bell_pair());
    auto code = protocol_code(ki, 4, 1.0);
    CHECK_THROWS_AS(audit_converse_chain(code, ki, 0.0), DimTooLarge);
}

TEST_CASE("audit_csv: stable header and one line per step") {
    auto rows = audited(bell_pair(), 2, 1.0);
    auto csv = audit_csv(rows);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "step,lhs,rhs,slack");
    int count = 0;
    while (std::getline(in, line)) ++count;
    CHECK(count == static_cast<int>(rows.size()));
    CHECK(csv.find("dec_dim_bound,") != std::string::npos);
    CHECK(csv.find("sum_rate_bound,") != std::string::npos);
    CHECK(csv.find("delta_per_copy,") != std::string::npos);
    CHECK(audit_csv(rows) == csv);
}

TEST_CASE("require_audit_slack: flags the offending step by name") {
    std::vector<AuditRow> rows{{"fine", 1.0, 0.5, 0.5}, {"broken", 0.0, 1.0, -1.0}};
    CHECK(min_slack(rows) == -1.0);
    CHECK_THROWS_AS(require_audit_slack(rows), SlackViolation);
    try {
        require_audit_slack(rows);
    } catch (const SlackViolation& e) {
        CHECK(std::string(e.what()).find("broken") != std::string::npos);
    }
}
