#include <benchmark/benchmark.h>

#include "ucip/entanglement.hpp"
#include "ucip/qbm.hpp"
#include "ucip/rng.hpp"

namespace {

ucip::qbm::QbmModel make_model(int n_hidden) {
    ucip::Rng rng(7);
    ucip::qbm::QbmModel m;
    m.W.resize(7, n_hidden);
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < n_hidden; ++j) m.W(i, j) = 0.3 * rng.normal();
    m.b = Eigen::VectorXd::Zero(7);
    m.c = Eigen::VectorXd::Zero(n_hidden);
    m.gamma = 0.5;
    m.beta = 1.0;
    return m;
}

const std::vector<std::uint8_t> kVisible = {1, 0, 1, 1, 0, 1, 0};

} // namespace

static void BM_ThermalState(benchmark::State& state) {
    const auto model = make_model(static_cast<int>(state.range(0)));
    const Eigen::MatrixXcd h = ucip::qbm::hamiltonian(model, kVisible);
    for (auto _ : state) {
        auto rho = ucip::qbm::thermal_state(h, model.beta);
        benchmark::DoNotOptimize(rho.rho.data());
    }
    state.SetComplexityN(1L << state.range(0));
}
BENCHMARK(BM_ThermalState)->DenseRange(4, 10, 2)->Complexity();

static void BM_PartialTrace(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto model = make_model(n);
    const auto rho = ucip::qbm::thermal_state(ucip::qbm::hamiltonian(model, kVisible), model.beta);
    const auto part = ucip::entanglement::Bipartition::half(n);
    for (auto _ : state) {
        auto rho_a = ucip::entanglement::partial_trace(rho, part);
        benchmark::DoNotOptimize(rho_a.rho.data());
    }
}
BENCHMARK(BM_PartialTrace)->DenseRange(4, 10, 2);

static void BM_VonNeumannEntropy(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto model = make_model(n);
    const auto rho_a = ucip::entanglement::partial_trace(
        ucip::qbm::thermal_state(ucip::qbm::hamiltonian(model, kVisible), model.beta),
        ucip::entanglement::Bipartition::half(n));
    for (auto _ : state) benchmark::DoNotOptimize(ucip::entanglement::von_neumann_entropy(rho_a));
}
BENCHMARK(BM_VonNeumannEntropy)->DenseRange(4, 10, 2);

static void BM_HiddenExpectations(benchmark::State& state) {
    const auto model = make_model(8);
    for (auto _ : state) {
        auto m = ucip::qbm::hidden_expectations(model, kVisible);
        benchmark::DoNotOptimize(m.data());
    }
}
BENCHMARK(BM_HiddenExpectations);

BENCHMARK_MAIN();
