#pragma once

#include <string>

#include "qki/ki.hpp"

namespace qki {

struct RatePoint {
    double e = 0.0;  // ebits per copy
    double q = 0.0;  // qubits per copy
};

// Entropic summary of a decomposed source (all in bits) and the two corner
// points of the achievable (E, Q) region:
//   Q >= s_CQ - s_C/2   and   Q + E >= s_CQ.
struct RateRegion {
    double s_c = 0.0;
    double s_cq = 0.0;
    double s_q_given_c = 0.0;
    double s_n_given_c = 0.0;
    double s_cnq = 0.0;
    RatePoint corner_unassisted;  // (0, s_CQ)
    RatePoint corner_assisted;    // (s_C/2, s_CQ - s_C/2)
};

// Computed from block data alone; cross-checked against the assembled image
// state when its total dimension stays at or below 256.
RateRegion rate_region(const KIDecomposition& ki);

bool is_achievable(const RatePoint& p, const RateRegion& r);

// s_CNQ - s_CQ = sum_j p_j S(omega_j): how much further a compressor may go
// when the redundant part only needs to be regenerated, not transmitted.
double schumacher_gap(const KIDecomposition& ki);

// Lower boundary Q_min(E) = max(s_CQ - E, s_CQ - s_C/2) sampled uniformly on
// E in [0, s_C/2 + 1]. Header `E,Qmin`, 17-significant-digit floats.
std::string region_boundary_csv(const RateRegion& r, int samples);

}  // namespace qki
