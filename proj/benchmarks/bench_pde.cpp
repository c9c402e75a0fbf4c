#include <cmath>
#include <numbers>

#include <benchmark/benchmark.h>

#include "semot/pde.hpp"
#include "semot/sinkhorn.hpp"

namespace {

semot::PeriodicGrid grid_for(int dim) {
    return dim == 1 ? semot::make_grid(1, 128, 80, 0.1) : semot::make_grid(2, 64, 40, 0.1);
}

semot::ScalarField bump(const semot::PeriodicGrid& grid) {
    semot::ScalarField f(grid);
    for (std::size_t n = 0; n < grid.size(); ++n) {
        const int i = static_cast<int>(n % static_cast<std::size_t>(grid.nx));
        const int j = static_cast<int>(n / static_cast<std::size_t>(grid.nx));
        f[n] = 0.02 * std::cos(2.0 * std::numbers::pi * grid.coordinate(i)) *
               (grid.dim == 1 ? 1.0 : std::cos(2.0 * std::numbers::pi * grid.coordinate(j)));
    }
    return f;
}

void BM_HjbStep(benchmark::State& state) {
    const semot::PeriodicGrid grid = grid_for(static_cast<int>(state.range(0)));
    semot::HjbSolver solver(grid);
    const semot::ScalarField phi1 = bump(grid);
    for (auto _ : state) benchmark::DoNotOptimize(solver.step(phi1));
}
BENCHMARK(BM_HjbStep)->Arg(1)->Arg(2)->Unit(benchmark::kMicrosecond);

void BM_FokkerPlanckStep(benchmark::State& state) {
    const semot::PeriodicGrid grid = grid_for(static_cast<int>(state.range(0)));
    const semot::HjbStepResult hjb = semot::HjbSolver(grid).step(bump(grid));
    semot::FokkerPlanckSolver solver(grid);
    const semot::ScalarField p = semot::uniform_density(grid);
    for (auto _ : state) benchmark::DoNotOptimize(solver.step(p, hjb.sigma_star));
}
BENCHMARK(BM_FokkerPlanckStep)->Arg(1)->Arg(2)->Unit(benchmark::kMicrosecond);

void BM_SinkhornPass1d(benchmark::State& state) {
    const semot::PeriodicGrid grid = grid_for(1);
    semot::SinkhornSolver solver(grid, semot::SinkhornConfig::defaults_1d(grid));
    const semot::ScalarField phi1 = bump(grid);
    const semot::Density mu0 = semot::periodized_gaussian(0.5, 0.05, grid);
    for (auto _ : state) benchmark::DoNotOptimize(solver.evaluate(phi1, mu0));
}
BENCHMARK(BM_SinkhornPass1d)->Unit(benchmark::kMillisecond);

}  // namespace
