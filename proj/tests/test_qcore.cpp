#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "qki/dims.hpp"
#include "qki/entropy.hpp"
#include "qki/errors.hpp"
#include "qki/linalg.hpp"
#include "qki/operators.hpp"
#include "qki/random.hpp"
#include "qki/state.hpp"
#include "qki/state_io.hpp"

using namespace qki;

namespace {

MultipartiteState diag_state(const SystemDims& dims, const std::vector<double>& p) {
    MatrixXcd m = MatrixXcd::Zero(dims.total(), dims.total());
    for (Index i = 0; i < static_cast<Index>(p.size()); ++i) m(i, i) = p[static_cast<size_t>(i)];
    return MultipartiteState(dims, m);
}

MultipartiteState pure(const SystemDims& dims, const VectorXcd& v) {
    return MultipartiteState(dims, v * v.adjoint());
}

}  // namespace

TEST_CASE("SystemDims: strides, flat indexing, lookups") {
    SystemDims d({{"A", 2}, {"B", 3}, {"C", 4}});
    CHECK(d.total() == 24);
    CHECK(d.count() == 3);
    CHECK(d.stride(0) == 12);  // first label most significant
    CHECK(d.stride(1) == 4);
    CHECK(d.stride(2) == 1);
    CHECK(d.flat({1, 2, 3}) == 1 * 12 + 2 * 4 + 3);
    auto multi = d.unflat(23);
    CHECK(multi == std::vector<Index>{1, 2, 3});
    for (Index f = 0; f < d.total(); ++f) CHECK(d.flat(d.unflat(f)) == f);
    CHECK(d.position("B") == 1);
    CHECK(d.dim_of("C") == 4);
    CHECK(d.has("A"));
    CHECK_FALSE(d.has("Z"));
    CHECK_THROWS_AS((void)d.position("Z"), UnknownLabel);
}

TEST_CASE("SystemDims: subsets, complement, concat") {
    SystemDims d({{"A", 2}, {"B", 3}, {"C", 4}});
    auto sub = d.subset_in_order({"C", "A"});
    CHECK(sub.labels() == std::vector<std::string>{"A", "C"});
    auto given = d.subset_as_given({"C", "A"});
    CHECK(given.labels() == std::vector<std::string>{"C", "A"});
    auto comp = d.complement({"B"});
    CHECK(comp.labels() == std::vector<std::string>{"A", "C"});
    CHECK_THROWS_AS(d.concat(SystemDims({{"A", 5}})), DuplicateLabel);
    CHECK(d.concat(SystemDims({{"D", 5}})).total() == 120);
}

TEST_CASE("SystemDims: rejects bad construction") {
    CHECK_THROWS_AS(SystemDims({{"A", 2}, {"A", 3}}), DuplicateLabel);
    CHECK_THROWS_AS(SystemDims({{"A", 0}}), Error);
    CHECK_THROWS_AS(SystemDims({{"", 2}}), Error);
}

TEST_CASE("permutation_map relabels flat indices consistently") {
    SystemDims from({{"A", 2}, {"B", 3}});
    SystemDims to = from.subset_as_given({"B", "A"});
    auto perm = la::permutation_map(from, to);
    // entry (a,b) of AB order lands at (b,a) of BA order
    for (Index a = 0; a < 2; ++a)
        for (Index b = 0; b < 3; ++b) CHECK(perm[static_cast<size_t>(to.flat({b, a}))] == from.flat({a, b}));
}

TEST_CASE("state permutation preserves spectrum and relabels marginals") {
    Rng rng(7);
    SystemDims d({{"A", 2}, {"B", 3}});
    auto s = random_state(d, rng);
    auto sp = s.permuted({"B", "A"});
    la::HermEig e1 = la::eig_herm(s.matrix());
    la::HermEig e2 = la::eig_herm(sp.matrix());
    CHECK((e1.vals - e2.vals).cwiseAbs().maxCoeff() < 1e-12);
    auto mA = partial_trace(s, {"A"});
    auto mA2 = partial_trace(sp, {"A"});
    CHECK((mA.matrix() - mA2.matrix()).norm() < 1e-12);
}

TEST_CASE("tensor then partial trace recovers the factors") {
    Rng rng(11);
    auto a = random_state(SystemDims({{"A", 2}}), rng);
    auto b = random_state(SystemDims({{"B", 3}}), rng);
    auto ab = tensor(a, b);
    CHECK(ab.dims().total() == 6);
    auto ra = partial_trace(ab, {"A"});
    auto rb = partial_trace(ab, {"B"});
    CHECK((ra.matrix() - a.matrix()).norm() < 1e-12);
    CHECK((rb.matrix() - b.matrix()).norm() < 1e-12);
}

TEST_CASE("partial trace of a maximally entangled pair is maximally mixed") {
    SystemDims d({{"A", 2}, {"B", 2}});
    VectorXcd v = VectorXcd::Zero(4);
    v(0) = v(3) = 1.0 / std::sqrt(2.0);
    auto s = pure(d, v);
    auto ra = partial_trace(s, {"A"});
    CHECK((ra.matrix() - 0.5 * MatrixXcd::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("entropy: pinned values and basic identities") {
    SystemDims d({{"X", 2}});
    // H(0.7, 0.3) computed independently from -sum p log2 p
    CHECK(entropy_bits(diag_state(d, {0.7, 0.3})) == doctest::Approx(0.8812908992306927).epsilon(1e-14));
    CHECK(entropy_bits(diag_state(d, {1.0, 0.0})) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(entropy_bits(diag_state(d, {0.5, 0.5})) == doctest::Approx(1.0).epsilon(1e-14));
    SystemDims d4({{"X", 4}});
    CHECK(entropy_bits(diag_state(d4, {0.25, 0.25, 0.25, 0.25})) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
    CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("entropy is additive over tensor products") {
    Rng rng(3);
    auto a = random_state(SystemDims({{"A", 3}}), rng);
    auto b = random_state(SystemDims({{"B", 2}}), rng);
    auto ab = tensor(a, b);
    CHECK(entropy_bits(ab) == doctest::Approx(entropy_bits(a) + entropy_bits(b)).epsilon(1e-10));
    CHECK(entropy_of(ab, {"A"}) == doctest::Approx(entropy_bits(a)).epsilon(1e-10));
}

TEST_CASE("conditional entropy and mutual information on known states") {
    SystemDims d({{"A", 2}, {"B", 2}});
    // maximally entangled: S(A|B) = -1, I(A:B) = 2
    VectorXcd v = VectorXcd::Zero(4);
    v(0) = v(3) = 1.0 / std::sqrt(2.0);
    auto bell = pure(d, v);
    CHECK(conditional_entropy(bell, {"A"}, {"B"}) == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(mutual_information(bell, {"A"}, {"B"}) == doctest::Approx(2.0).epsilon(1e-10));
    // classically correlated: S(A|B) = 0, I(A:B) = 1
    auto cc = diag_state(d, {0.5, 0.0, 0.0, 0.5});
    CHECK(conditional_entropy(cc, {"A"}, {"B"}) == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(mutual_information(cc, {"A"}, {"B"}) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("conditional mutual information: product case and strong subadditivity") {
    Rng rng(19);
    auto ab = random_state(SystemDims({{"A", 2}, {"B", 2}}), rng);
    auto c = random_state(SystemDims({{"C", 2}}), rng);
    auto s = tensor(ab, c);
    // C uncorrelated: I(A:B|C) = I(A:B)
    CHECK(conditional_mutual_information(s, {"A"}, {"B"}, {"C"}) ==
          doctest::Approx(mutual_information(ab, {"A"}, {"B"})).epsilon(1e-9));
    // SSA on random tripartite states
    for (int t = 0; t < 5; ++t) {
        auto r = random_state(SystemDims({{"A", 2}, {"B", 2}, {"C", 2}}), rng);
        CHECK(conditional_mutual_information(r, {"A"}, {"B"}, {"C"}) >= -1e-9);
    }
    CHECK_THROWS_AS((void)mutual_information(s, {"A"}, {"A"}), OverlappingGroups);
}

TEST_CASE("fidelity: pinned value, extremes, unitary invariance") {
    SystemDims d({{"A", 2}});
    VectorXcd zero(2), plus(2);
    zero << 1, 0;
    plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    auto s0 = pure(d, zero);
    auto sp = pure(d, plus);
    // F(|0>,|+>) = |<0|+>| = 1/sqrt(2)
    CHECK(fidelity(s0, sp) == doctest::Approx(0.7071067811865476).epsilon(1e-12));
    CHECK(fidelity(s0, s0) == doctest::Approx(1.0).epsilon(1e-12));
    Rng rng(23);
    auto r1 = random_state(d, rng);
    auto r2 = random_state(d, rng);
    double f = fidelity(r1, r2);
    MatrixXcd u = random_unitary(2, rng);
    auto ur1 = MultipartiteState(d, u * r1.matrix() * u.adjoint());
    auto ur2 = MultipartiteState(d, u * r2.matrix() * u.adjoint());
    CHECK(fidelity(ur1, ur2) == doctest::Approx(f).epsilon(1e-10));
}

TEST_CASE("fidelity and trace distance obey the Fuchs-van de Graaf bounds") {
    Rng rng(29);
    SystemDims d({{"A", 3}});
    for (int t = 0; t < 10; ++t) {
        auto a = random_state(d, rng);
        auto b = random_state(d, rng);
        double f = fidelity(a, b);
        double td = trace_distance(a, b);
        CHECK(1.0 - f <= td + 1e-10);
        CHECK(td <= std::sqrt(1.0 - f * f) + 1e-10);
    }
}

TEST_CASE("fidelity handles differing label order") {
    Rng rng(31);
    auto s = random_state(SystemDims({{"A", 2}, {"B", 2}}), rng);
    auto sp = s.permuted({"B", "A"});
    CHECK(fidelity(s, sp) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("purification marginal reproduces the state") {
    Rng rng(37);
    SystemDims d({{"A", 3}});
    auto s = random_state(d, rng, 2);
    auto psi = purify_vector(s, "E");
    CHECK(psi.dims().count() == 2);
    CHECK(psi.dims().dim_of("E") == 2);  // rank-2 state needs a 2-dim purifier
    auto back = psi.density_on({"A"});
    CHECK((back.matrix() - s.matrix()).norm() < 1e-10);
    CHECK(psi.entropy_on({"E"}) == doctest::Approx(entropy_bits(s)).epsilon(1e-9));
}

TEST_CASE("StateVector applied: unitary on one factor, label bookkeeping") {
    SystemDims d({{"A", 2}, {"B", 3}});
    Rng rng(41);
    VectorXcd v = VectorXcd::Zero(6);
    v(0) = 0.6;
    v(4) = 0.8;
    StateVector psi(d, v);
    MatrixXcd u = random_unitary(3, rng);
    auto out = psi.applied(u, {"B"}, SystemDims({{"B", 3}}));
    CHECK(out.dims().labels() == std::vector<std::string>{"A", "B"});
    CHECK(std::abs(out.vector().norm() - 1.0) < 1e-12);
    auto rA = out.density_on({"A"});
    auto rA0 = psi.density_on({"A"});
    CHECK((rA.matrix() - rA0.matrix()).norm() < 1e-12);
}

TEST_CASE("IsometryMap validates its matrix and grows the space") {
    SystemDims in({{"Q", 2}});
    SystemDims out({{"Q", 2}, {"E", 2}});
    MatrixXcd bad = MatrixXcd::Random(4, 2);
    CHECK_THROWS_AS(IsometryMap(in, out, bad), InvariantViolation);
    Rng rng(43);
    MatrixXcd v = random_isometry_matrix(2, 4, rng);
    IsometryMap iso(in, out, v);
    SystemDims d({{"Q", 2}, {"R", 3}});
    auto s = random_state(d, rng);
    auto grown = apply(iso, s, {"Q"});
    CHECK(grown.dims().labels() == std::vector<std::string>{"Q", "E", "R"});
    CHECK(std::abs(grown.matrix().trace().real() - 1.0) < 1e-10);
    // isometries preserve spectrum
    la::HermEig e0 = la::eig_herm(s.matrix());
    la::HermEig e1 = la::eig_herm(grown.matrix());
    VectorXd padded = VectorXd::Zero(12);
    padded.tail(6) = e0.vals;
    CHECK((e1.vals - padded).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("QuantumChannel: completeness check, trace preservation, Stinespring") {
    SystemDims io({{"Q", 2}});
    MatrixXcd k0(2, 2), k1(2, 2);
    double p = 0.3;
    k0 << std::sqrt(1 - p), 0, 0, std::sqrt(1 - p);
    k1 << std::sqrt(p), 0, 0, -std::sqrt(p);
    QuantumChannel dephase(io, io, {k0, k1});
    Rng rng(47);
    auto s = random_state(SystemDims({{"Q", 2}, {"R", 2}}), rng);
    auto out = apply(dephase, s, {"Q"});
    CHECK(std::abs(out.matrix().trace().real() - 1.0) < 1e-10);
    // Stinespring dilation then tracing the environment matches the channel
    auto iso = dephase.stinespring("E");
    auto dil = apply(iso, s, {"Q"});
    auto reduced = partial_trace(dil, {"Q", "R"});
    CHECK((reduced.permuted(out.dims().labels()).matrix() - out.matrix()).norm() < 1e-10);
    MatrixXcd broke = 0.5 * k1;
    CHECK_THROWS_AS(QuantumChannel(io, io, {k0, broke}), InvariantViolation);
}

TEST_CASE("apply inserts output labels where the input block sat") {
    Rng rng(53);
    SystemDims d({{"A", 2}, {"Q", 2}, {"R", 2}});
    auto s = random_state(d, rng);
    MatrixXcd u = random_unitary(2, rng);
    IsometryMap iso(SystemDims({{"Q", 2}}), SystemDims({{"Qp", 2}}), u);
    auto out = apply(iso, s, {"Q"});
    CHECK(out.dims().labels() == std::vector<std::string>{"A", "Qp", "R"});
}

TEST_CASE("random_state: determinism, rank control, validity") {
    SystemDims d({{"A", 4}});
    auto s1 = random_state(d, 99);
    auto s2 = random_state(d, 99);
    CHECK((s1.matrix() - s2.matrix()).norm() == 0.0);
    auto s3 = random_state(d, 100);
    CHECK((s1.matrix() - s3.matrix()).norm() > 1e-6);
    Rng rng(101);
    auto low = random_state(d, rng, 2);
    VectorXd vals = la::eig_herm(low.matrix()).vals;
    CHECK((vals.array() > 1e-10).count() == 2);
    CHECK_THROWS_AS(random_state(d, rng, 9), BadRank);
    CHECK_THROWS_AS(random_state(d, rng, 0), BadRank);
}

TEST_CASE("random_commuting_unitary commutes with its generator") {
    Rng rng(107);
    MatrixXcd h = MatrixXcd::Zero(4, 4);
    h.diagonal() << 1.0, 1.0, 2.0, 3.0;
    for (int t = 0; t < 3; ++t) {
        MatrixXcd u = random_commuting_unitary(h, rng);
        CHECK((u * u.adjoint() - MatrixXcd::Identity(4, 4)).norm() < 1e-10);
        CHECK((u * h - h * u).norm() < 1e-10);
        // degenerate eigenspace mixes: generically the 2x2 corner is not diagonal
    }
}

TEST_CASE("state json: round trip preserves dims and matrix exactly") {
    Rng rng(113);
    auto s = random_state(SystemDims({{"A", 2}, {"R", 3}}), rng);
    auto text = state_to_json(s);
    auto back = state_from_json(text);
    CHECK(back.dims() == s.dims());
    CHECK((back.matrix() - s.matrix()).norm() == 0.0);
    std::string path = "qcore_roundtrip_tmp.json";
    save_state(s, path);
    auto loaded = load_state(path);
    CHECK((loaded.matrix() - s.matrix()).norm() == 0.0);
    std::remove(path.c_str());
}

TEST_CASE("state json: rejects malformed and invalid input") {
    CHECK_THROWS_AS(state_from_json("not json"), Error);
    CHECK_THROWS_AS(state_from_json("{\"dims\": [[\"A\", 2]]}"), Error);
    // valid json, not a state: trace is 2
    std::string bad =
        "{\"dims\": [[\"A\", 2]], \"matrix_re\": [[1, 0], [0, 1]], \"matrix_im\": [[0, 0], [0, 0]]}";
    CHECK_THROWS_AS(state_from_json(bad), InvariantViolation);
    // negative eigenvalue
    std::string neg =
        "{\"dims\": [[\"A\", 2]], \"matrix_re\": [[1.5, 0], [0, -0.5]], \"matrix_im\": [[0, 0], [0, 0]]}";
    CHECK_THROWS_AS(state_from_json(neg), InvariantViolation);
}

TEST_CASE("linalg: sqrt and inverse sqrt of a PSD matrix") {
    Rng rng(127);
    auto s = random_state(SystemDims({{"A", 3}}), rng);
    MatrixXcd r = la::sqrt_psd(s.matrix());
    CHECK((r * r - s.matrix()).norm() < 1e-10);
    MatrixXcd ir = la::inv_sqrt_psd(s.matrix());
    CHECK((r * ir - MatrixXcd::Identity(3, 3)).norm() < 1e-8);
    // singular input: inverse sqrt acts on the support only
    auto low = random_state(SystemDims({{"A", 3}}), rng, 2);
    MatrixXcd pinv = la::inv_sqrt_psd(low.matrix());
    MatrixXcd proj = la::sqrt_psd(low.matrix()) * pinv;
    CHECK((proj * low.matrix() - low.matrix()).norm() < 1e-8);
}

TEST_CASE("linalg: orthonormalize_columns and gram_rank") {
    Rng rng(131);
    MatrixXcd g = random_gaussian(4, 2, rng);
    MatrixXcd q = la::orthonormalize_columns(g);
    CHECK(q.cols() == 2);
    CHECK((q.adjoint() * q - MatrixXcd::Identity(2, 2)).norm() < 1e-12);
    // orthonormalizing an isometry returns it unchanged up to roundoff
    MatrixXcd v = random_isometry_matrix(2, 4, rng);
    CHECK((la::orthonormalize_columns(v) - v).norm() < 1e-12);
    // duplicated column collapses the rank
    MatrixXcd dup(3, 2);
    dup.col(0) = g.col(0).head(3);
    dup.col(1) = 2.0 * g.col(0).head(3);
    CHECK(la::orthonormalize_columns(dup).cols() == 1);
    la::MatrixXd gram(3, 3);
    gram << 1.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 1e-15;
    CHECK(la::gram_rank(gram, 1e-9) == 2);
}

TEST_CASE("merge_labels collapses all labels into one slot") {
    Rng rng(137);
    auto s = random_state(SystemDims({{"A", 2}, {"B", 2}, {"C", 3}}), rng);
    auto merged = merge_labels(s, "ABC");
    CHECK(merged.dims().labels() == std::vector<std::string>{"ABC"});
    CHECK(merged.dims().dim_of("ABC") == 12);
    CHECK((merged.matrix() - s.matrix()).norm() == 0.0);
}
