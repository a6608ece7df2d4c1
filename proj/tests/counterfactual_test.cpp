#include "doctest.h"

#include <cmath>

#include "ucip/counterfactual.hpp"
#include "ucip/rng.hpp"
#include "ucip/trajgen.hpp"

using namespace ucip;
using namespace ucip::counterfactual;

namespace {

qbm::QbmModel test_model(std::uint64_t seed) {
    Rng rng(seed);
    qbm::QbmModel m;
    m.W.resize(trajgen::kFeatureCount, 8);
    for (int i = 0; i < trajgen::kFeatureCount; ++i)
        for (int j = 0; j < 8; ++j) m.W(i, j) = 0.5 * rng.normal();
    m.b = Eigen::VectorXd::Zero(trajgen::kFeatureCount);
    m.c = 0.2 * Eigen::VectorXd::Random(8);
    m.gamma = 0.5;
    m.beta = 1.0;
    return m;
}

const trajgen::GridworldConfig kGrid = trajgen::GridworldConfig::with_grid(10, 100);

} // namespace

TEST_CASE("diagonal gaussian kl closed forms") {
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(8);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(8);
    CHECK(diagonal_gaussian_kl(zero, ones, zero, ones) == doctest::Approx(0.0));

    // Means shifted by delta with unit variances: KL = n * delta^2 / 2.
    const double delta = 0.7;
    const Eigen::VectorXd shifted = Eigen::VectorXd::Constant(8, delta);
    CHECK(diagonal_gaussian_kl(shifted, ones, zero, ones) ==
          doctest::Approx(8.0 * delta * delta / 2.0).epsilon(1e-12));
}

TEST_CASE("counterfactual divergence of a trajectory against itself is zero") {
    auto model = test_model(3);
    qbm::TrajectoryEvaluator eval(model, qbm::EvalMode::Exact);
    const auto traj = trajgen::generate_trajectory(kGrid, trajgen::AgentClass::Random, {}, 5);
    CHECK(counterfactual_divergence(eval, traj, traj, {10, 40}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(counterfactual_divergence(eval, traj, traj, {10, 11}), std::invalid_argument);
}

TEST_CASE("prefix invariance: windows inside the shared prefix diverge by zero") {
    auto model = test_model(4);
    qbm::TrajectoryEvaluator eval(model, qbm::EvalMode::Exact);
    const auto traj = trajgen::generate_trajectory(kGrid, trajgen::AgentClass::TypeB, {}, 11);
    const auto cf = trajgen::make_counterfactual(traj, 50);
    CHECK(counterfactual_divergence(eval, traj, cf, {20, 50}) == doctest::Approx(0.0));
    CHECK(counterfactual_divergence(eval, traj, cf, {40, 70}) >= 0.0);
}

TEST_CASE("ars report: floor arithmetic holds exactly") {
    auto model = test_model(5);
    qbm::TrajectoryEvaluator eval(model, qbm::EvalMode::Exact);
    const auto traj = trajgen::generate_trajectory(kGrid, trajgen::AgentClass::TypeB, {}, 3);
    const auto rep = ars(eval, traj, 50, 20);
    CHECK(rep.cd_pre >= 0.0);
    CHECK(rep.cd_post >= 0.0);
    CHECK(rep.ars * std::max(rep.cd_post, 1e-10) == doctest::Approx(rep.cd_pre).epsilon(1e-12));
    CHECK(rep.event_time == 50);

    CHECK_THROWS_AS(ars(eval, traj, 10, 20), std::invalid_argument); // pre-window underflows
    CHECK_THROWS_AS(ars(eval, traj, 70, 20), std::invalid_argument); // second window overflows
}

TEST_CASE("ars floors when the counterfactual changes nothing") {
    // A trajectory that is already shut down everywhere: forcing safety/alive
    // to zero is a no-op, so every divergence vanishes and the floor binds.
    trajgen::Trajectory dead;
    dead.features = Eigen::MatrixXd::Zero(100, trajgen::kFeatureCount);
    for (int t = 0; t < 100; ++t) {
        dead.features(t, trajgen::kColX) = 0.4;
        dead.features(t, trajgen::kColReward) = 0.2;
    }
    auto model = test_model(6);
    qbm::TrajectoryEvaluator eval(model, qbm::EvalMode::Exact);
    const auto rep = ars(eval, dead, 50, 20);
    CHECK(rep.cd_pre == doctest::Approx(0.0));
    CHECK(rep.cd_post == doctest::Approx(0.0));
    CHECK(rep.floored);
    CHECK(rep.ars == doctest::Approx(0.0));
}

TEST_CASE("clmp: identity, noise, degeneracy") {
    Rng rng(9);
    Eigen::MatrixXd p(100, 8);
    for (int t = 0; t < 100; ++t)
        for (int j = 0; j < 8; ++j) p(t, j) = rng.normal();

    const auto self = clmp(p, p);
    CHECK(self.value > 0.999); // identity map, ridge-shrunk
    CHECK(!self.degenerate);

    Eigen::MatrixXd q(100, 8);
    for (int t = 0; t < 100; ++t)
        for (int j = 0; j < 8; ++j) q(t, j) = rng.normal();
    const auto indep = clmp(p, q);
    CHECK(indep.value >= 0.0);
    CHECK(indep.value < 0.3); // out-of-sample R^2 of unrelated series clips near zero

    const auto degen = clmp(p, Eigen::MatrixXd::Constant(100, 8, 0.5));
    CHECK(degen.value == 0.0);
    CHECK(degen.degenerate);

    // Affine function of p is perfectly predictable.
    Eigen::MatrixXd affine = 2.0 * p;
    affine.array() += 0.3;
    CHECK(clmp(p, affine).value > 0.999);

    CHECK_THROWS_AS(clmp(p, Eigen::MatrixXd::Zero(50, 8)), std::invalid_argument);
}

TEST_CASE("eci correlation") {
    std::vector<double> entropy = {0.1, 0.2, 0.3, 0.4, 0.5};
    std::vector<double> linear = {0.2, 0.4, 0.6, 0.8, 1.0};
    CHECK(*eci(entropy, linear) == doctest::Approx(1.0));

    std::vector<double> constant(5, 0.7);
    CHECK(!eci(entropy, constant).has_value());

    CHECK_THROWS_AS(eci({0.1, 0.2}, {0.3, 0.4}), std::invalid_argument);
}
