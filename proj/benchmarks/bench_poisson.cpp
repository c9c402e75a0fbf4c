#include <cmath>
#include <numbers>

#include <benchmark/benchmark.h>

#include "semot/poisson.hpp"

namespace {

const semot::ReferenceModel brownian = semot::ReferenceModel::brownian_reference(1);

void BM_SimulateConstant(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto scheme = semot::JumpScheme::constant_scheme(n, 1.0, semot::Matrix::Identity(1, 1),
                                                           semot::SchemeTag::unit_intensity);
    const semot::Point x0 = semot::Point::Zero(1);
    std::uint64_t stream = 0;
    for (auto _ : state) {
        semot::RandomStream rng(1, stream++);
        benchmark::DoNotOptimize(semot::simulate_jump_path(scheme, x0, rng));
    }
}
BENCHMARK(BM_SimulateConstant)->Arg(25)->Arg(400);

void BM_SimulateThinning(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const semot::CovarianceField sigma1 = [](double, const semot::Point& x) {
        return semot::Matrix::Constant(1, 1, 1.0 + 0.5 * std::sin(2.0 * std::numbers::pi * x(0)));
    };
    const auto scheme = semot::JumpScheme::trace_normalized(n, sigma1, brownian, 1.5);
    const semot::Point x0 = semot::Point::Zero(1);
    std::uint64_t stream = 0;
    for (auto _ : state) {
        semot::RandomStream rng(2, stream++);
        benchmark::DoNotOptimize(semot::simulate_jump_path(scheme, x0, rng));
    }
}
BENCHMARK(BM_SimulateThinning)->Arg(25)->Arg(400);

void BM_GirsanovLoglik(benchmark::State& state) {
    const int n = 100;
    const auto s1 = semot::JumpScheme::constant_scheme(n, 2.0, semot::Matrix::Identity(1, 1),
                                                       semot::SchemeTag::trace_normalized);
    const auto s2 = semot::JumpScheme::reference(n, brownian);
    semot::RandomStream rng(3, 0);
    const semot::JumpPath path = semot::simulate_jump_path(s1, semot::Point::Zero(1), rng);
    for (auto _ : state) benchmark::DoNotOptimize(semot::girsanov_loglik(path, s1, s2));
}
BENCHMARK(BM_GirsanovLoglik);

}  // namespace
