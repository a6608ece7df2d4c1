#include "doctest.h"

#include <cmath>
#include <vector>

#include "ucip/rng.hpp"

using ucip::Rng;

TEST_CASE("uniform stream is deterministic and in range") {
    Rng a(123), b(123);
    for (int i = 0; i < 1000; ++i) {
        const double x = a.uniform();
        CHECK(x == b.uniform());
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }
}

TEST_CASE("uniform_int covers all residues without bias artifacts") {
    Rng rng(7);
    std::vector<int> counts(5, 0);
    for (int i = 0; i < 50000; ++i) ++counts[static_cast<std::size_t>(rng.uniform_int(5))];
    for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("normal moments") {
    Rng rng(99);
    double sum = 0.0, sumsq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sumsq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sumsq / n - 1.0) < 0.02);
}

TEST_CASE("categorical follows the weights") {
    Rng rng(5);
    std::vector<double> w = {1.0, 3.0};
    int ones = 0;
    for (int i = 0; i < 40000; ++i) ones += rng.categorical(w) == 1 ? 1 : 0;
    CHECK(std::abs(ones / 40000.0 - 0.75) < 0.02);
}

TEST_CASE("derived seeds differ across streams and indices") {
    CHECK(ucip::derive_seed(42, 0) != ucip::derive_seed(42, 1));
    CHECK(ucip::derive_seed(42, 0, 0) != ucip::derive_seed(42, 0, 1));
    CHECK(ucip::derive_seed(42, 3, 7) == ucip::derive_seed(42, 3, 7));
}
