#include <random>

#include <benchmark/benchmark.h>

#include "semot/hamiltonian.hpp"

namespace {

void BM_Hamiltonian1d(benchmark::State& state) {
    double g = -3.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(semot::hamiltonian_1d(g));
        g = g > 3.0 ? -3.0 : g + 1e-3;
    }
}
BENCHMARK(BM_Hamiltonian1d);

void BM_Hamiltonian2x2(benchmark::State& state) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    const double a = u(rng), b = u(rng), c = u(rng);
    for (auto _ : state) benchmark::DoNotOptimize(semot::hamiltonian_2x2(a, b, c));
}
BENCHMARK(BM_Hamiltonian2x2);

void BM_HamiltonianGeneral(benchmark::State& state) {
    const auto d = static_cast<Eigen::Index>(state.range(0));
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    semot::Matrix g(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = i; j < d; ++j) g(i, j) = g(j, i) = u(rng);
    for (auto _ : state) benchmark::DoNotOptimize(semot::hamiltonian(g));
}
BENCHMARK(BM_HamiltonianGeneral)->Arg(3)->Arg(5)->Arg(10);

}  // namespace
