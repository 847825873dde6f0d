#include "qki/rates.hpp"

#include <cmath>
#include <cstdio>

#include "qki/entropy.hpp"
#include "qki/errors.hpp"

namespace qki {

namespace {

constexpr double kCrossCheckTol = 1e-9;
constexpr Index kAssemblyCap = 256;
constexpr double kMembershipTol = 1e-12;

}  // namespace

RateRegion rate_region(const KIDecomposition& ki) {
    RateRegion r;
    double h_p = 0.0;
    double s_q = 0.0;
    double s_n = 0.0;
    for (const auto& b : ki.blocks) {
        if (b.p > 0) h_p -= b.p * std::log2(b.p);
        s_q += b.p * entropy_of(b.rho_qr, {"Q"});
        s_n += b.p * entropy_bits(b.omega);
    }
    r.s_c = h_p;
    r.s_q_given_c = s_q;
    r.s_n_given_c = s_n;
    r.s_cq = h_p + s_q;
    r.s_cnq = r.s_cq + s_n;
    r.corner_unassisted = {0.0, r.s_cq};
    r.corner_assisted = {h_p / 2.0, r.s_cq - h_p / 2.0};

    if (ki.cqnr_dims().total() <= kAssemblyCap) {
        auto omega = assemble_omega(ki);
        const double c = entropy_of(omega, {"C"});
        const double cq = entropy_of(omega, {"C", "Q"});
        const double cnq = entropy_of(omega, {"C", "Q", "N"});
        if (std::abs(c - r.s_c) > kCrossCheckTol || std::abs(cq - r.s_cq) > kCrossCheckTol ||
            std::abs(cnq - r.s_cnq) > kCrossCheckTol)
            throw VerificationFailed(
                "rate_region: block formulas disagree with assembled-state entropies");
    }
    return r;
}

bool is_achievable(const RatePoint& p, const RateRegion& r) {
    return p.q >= r.s_cq - r.s_c / 2.0 - kMembershipTol &&
           p.q + p.e >= r.s_cq - kMembershipTol;
}

double schumacher_gap(const KIDecomposition& ki) {
    double s_n = 0.0;
    for (const auto& b : ki.blocks) s_n += b.p * entropy_bits(b.omega);
    return s_n;
}

std::string region_boundary_csv(const RateRegion& r, int samples) {
    if (samples < 2) throw Error("region_boundary_csv: need at least 2 samples");
    std::string out = "E,Qmin\n";
    char line[80];
    const double e_max = r.s_c / 2.0 + 1.0;
    for (int i = 0; i < samples; ++i) {
        const double e = e_max * static_cast<double>(i) / static_cast<double>(samples - 1);
        const double q = std::max(r.s_cq - e, r.s_cq - r.s_c / 2.0);
        std::snprintf(line, sizeof(line), "%.17g,%.17g\n", e, q);
        out += line;
    }
    return out;
}

}  // namespace qki
