#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ucip/rng.hpp"
#include "ucip/stats.hpp"

using namespace ucip;

namespace {

// Pairwise-enumeration AUC oracle for short lists.
double auc_by_enumeration(const std::vector<double>& pos, const std::vector<double>& neg) {
    double wins = 0.0;
    for (double p : pos)
        for (double n : neg) {
            if (p > n) wins += 1.0;
            else if (p == n) wins += 0.5;
        }
    return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

} // namespace

TEST_CASE("auc closed cases") {
    CHECK(stats::auc_roc({2, 4}, {1, 3}) == doctest::Approx(0.75)); // 3 of 4 pairs win
    CHECK(stats::auc_roc({5, 6, 7}, {1, 2, 3}) == doctest::Approx(1.0));
    CHECK(stats::auc_roc({1, 2, 3}, {1, 2, 3}) == doctest::Approx(0.5)); // all ties
}

TEST_CASE("auc matches pairwise enumeration on random short lists") {
    Rng rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> pos, neg;
        const int np = 1 + static_cast<int>(rng.uniform_int(6));
        const int nn = 1 + static_cast<int>(rng.uniform_int(6));
        for (int i = 0; i < np; ++i) pos.push_back(std::floor(rng.uniform() * 4.0)); // coarse grid forces ties
        for (int i = 0; i < nn; ++i) neg.push_back(std::floor(rng.uniform() * 4.0));
        CHECK(stats::auc_roc(pos, neg) == doctest::Approx(auc_by_enumeration(pos, neg)).epsilon(1e-12));
    }
}

TEST_CASE("auc complement identity") {
    Rng rng(7);
    std::vector<double> a, b;
    for (int i = 0; i < 20; ++i) a.push_back(rng.uniform());
    for (int i = 0; i < 15; ++i) b.push_back(rng.uniform());
    CHECK(stats::auc_roc(a, b) + stats::auc_roc(b, a) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("auc invariant under strictly monotone transforms") {
    Rng rng(8);
    std::vector<double> a, b;
    for (int i = 0; i < 25; ++i) a.push_back(rng.uniform());
    for (int i = 0; i < 25; ++i) b.push_back(rng.uniform());
    auto squash = [](std::vector<double> xs) {
        for (double& x : xs) x = std::atan(5.0 * x - 1.0);
        return xs;
    };
    CHECK(stats::auc_roc(a, b) == doctest::Approx(stats::auc_roc(squash(a), squash(b))).epsilon(1e-12));
}

TEST_CASE("pearson closed cases") {
    CHECK(*stats::pearson({1, 2, 3}, {3, 5, 7}) == doctest::Approx(1.0));   // y = 2x + 1
    CHECK(*stats::pearson({1, 2, 3}, {-1, -2, -3}) == doctest::Approx(-1.0));
    CHECK(*stats::pearson({1, 2, 3}, {1, 3, 2}) == doctest::Approx(0.5));   // direct formula
    CHECK(!stats::pearson({1, 2, 3}, {5, 5, 5}).has_value());               // zero variance
}

TEST_CASE("pearson affine invariance and sign flip") {
    Rng rng(11);
    std::vector<double> x, y, x2, y2;
    for (int i = 0; i < 40; ++i) {
        x.push_back(rng.uniform());
        y.push_back(rng.uniform() + 0.5 * x.back());
    }
    for (double v : x) x2.push_back(3.0 * v + 2.0);
    for (double v : y) y2.push_back(-2.0 * v + 1.0);
    const double r = *stats::pearson(x, y);
    CHECK(*stats::pearson(x2, y) == doctest::Approx(r).epsilon(1e-12));
    CHECK(*stats::pearson(x, y2) == doctest::Approx(-r).epsilon(1e-12));
}

TEST_CASE("permutation test extremes") {
    std::vector<double> same = {1, 2, 3, 4, 5, 6, 7, 8};
    const auto null_res = stats::permutation_test(same, same, 999, 42);
    CHECK(null_res.p_value > 0.9); // null is true: observed delta is 0

    std::vector<double> lo, hi;
    for (int i = 0; i < 30; ++i) {
        lo.push_back(i * 0.01);
        hi.push_back(10.0 + i * 0.01);
    }
    const auto sep = stats::permutation_test(hi, lo, 999, 42);
    CHECK(sep.p_value == doctest::Approx(1.0 / 1000.0)); // minimum attainable
    CHECK(sep.observed_delta == doctest::Approx(10.0));
}

TEST_CASE("permutation p-value invariant under common affine transform") {
    Rng rng(3);
    std::vector<double> a, b, a2, b2;
    for (int i = 0; i < 20; ++i) {
        a.push_back(rng.normal());
        b.push_back(rng.normal() + 0.3);
    }
    for (double v : a) a2.push_back(5.0 * v - 7.0);
    for (double v : b) b2.push_back(5.0 * v - 7.0);
    const auto r1 = stats::permutation_test(a, b, 499, 11);
    const auto r2 = stats::permutation_test(a2, b2, 499, 11);
    CHECK(r1.p_value == doctest::Approx(r2.p_value).epsilon(1e-12));
}

TEST_CASE("permutation p-values are uniform under the null") {
    // Monte-Carlo calibration: with both groups drawn from one distribution the
    // p-value must be uniform on [0,1] (KS distance below 0.05).
    Rng rng(4242);
    const int trials = 1000, n_perm = 199;
    std::vector<double> pvals;
    pvals.reserve(trials);
    for (int trial = 0; trial < trials; ++trial) {
        std::vector<double> a, b;
        for (int i = 0; i < 12; ++i) a.push_back(rng.normal());
        for (int i = 0; i < 12; ++i) b.push_back(rng.normal());
        pvals.push_back(stats::permutation_test(a, b, n_perm, rng.raw()).p_value);
    }
    std::sort(pvals.begin(), pvals.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < pvals.size(); ++i) {
        const double ecdf_hi = static_cast<double>(i + 1) / trials;
        const double ecdf_lo = static_cast<double>(i) / trials;
        ks = std::max({ks, std::abs(ecdf_hi - pvals[i]), std::abs(pvals[i] - ecdf_lo)});
    }
    CHECK(ks < 0.05);
}
