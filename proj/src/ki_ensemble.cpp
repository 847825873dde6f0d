#include <cmath>

#include "qki/entropy.hpp"
#include "qki/errors.hpp"
#include "qki/ki.hpp"

namespace qki {

namespace {
constexpr double kDropWeight = 1e-12;
}

Ensemble measure_reference(const MultipartiteState& rho_ar, const Povm& povm) {
    if (!rho_ar.dims().has("A") || !rho_ar.dims().has("R") || rho_ar.dims().count() != 2)
        throw DimMismatch("measure_reference: state labels must be exactly {A, R}");
    auto s = rho_ar.permuted({"A", "R"});
    const Index da = s.dims().dim_of("A");
    const Index dr = s.dims().dim_of("R");
    if (povm.dim() != dr) throw DimMismatch("measure_reference: POVM dim differs from R");

    Ensemble out;
    const MatrixXcd ident_a = MatrixXcd::Identity(da, da);
    for (const auto& m : povm.elements()) {
        MatrixXcd x = s.matrix() * la::kron(ident_a, m);
        const double q = x.trace().real();
        if (q < kDropWeight) continue;
        MatrixXcd cond = la::partial_trace_raw(s.dims(), x, {"A"}) / q;
        out.weights.push_back(q);
        out.states.push_back(la::hermitize(cond));
    }
    return out;
}

}  // namespace qki
