#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qki/povm.hpp"
#include "qki/random.hpp"

using namespace qki;

TEST_CASE("IC POVM: element count, normalization, positivity") {
    for (Index d : {2, 3, 4, 5}) {
        Povm povm = make_ic_povm(d);
        CHECK(povm.size() == d * d);
        MatrixXcd sum = MatrixXcd::Zero(d, d);
        for (const auto& m : povm.elements()) {
            CHECK(la::hermiticity_error(m) < 1e-12);
            la::HermEig e = la::eig_herm(m);
            CHECK(e.vals.minCoeff() > -1e-12);
            sum += m;
        }
        CHECK((sum - MatrixXcd::Identity(d, d)).norm() < 1e-10);
    }
}

TEST_CASE("IC POVM spans the full operator space") {
    for (Index d : {2, 3, 4}) {
        Povm povm = make_ic_povm(d);
        CHECK(povm_gram_rank(povm) == d * d);
    }
}

TEST_CASE("IC POVM outcome statistics determine the state") {
    // two states with identical outcome distributions must be equal;
    // check the contrapositive on random pairs
    Rng rng(211);
    for (int t = 0; t < 4; ++t) {
        Index d = 2 + (t % 2);
        Povm povm = make_ic_povm(d);
        auto a = random_state(SystemDims({{"A", d}}), rng);
        auto b = random_state(SystemDims({{"A", d}}), rng);
        double maxdiff = 0.0;
        for (const auto& m : povm.elements()) {
            double pa = (m * a.matrix()).trace().real();
            double pb = (m * b.matrix()).trace().real();
            maxdiff = std::max(maxdiff, std::abs(pa - pb));
        }
        CHECK(maxdiff > 1e-6);  // distinct states give distinct statistics
    }
}
