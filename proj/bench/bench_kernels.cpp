// Serial vs OpenMP log-density kernels.

#include <vector>

#include <benchmark/benchmark.h>

#include "smsnme/kernels.hpp"

using namespace smsnme;

namespace {

Dataset make_data(std::size_t n) {
    Rng rng = make_stream(1, 0);
    return simulate_me(sim1_theta(Family::SkewT), n, rng).data;
}

template <bool Parallel>
void BM_RowLogDensities(benchmark::State &state) {
    const auto family = static_cast<Family>(state.range(1));
    const Dataset data = make_data(static_cast<std::size_t>(state.range(0)));
    const MeTheta theta = sim1_theta(family);
    std::vector<double> out(data.size());
    for (auto _ : state) {
        if constexpr (Parallel) {
            row_log_densities_parallel(theta, data, out);
        } else {
            row_log_densities_serial(theta, data, out);
        }
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_LoglikMatrix(benchmark::State &state) {
    const Dataset data = make_data(static_cast<std::size_t>(state.range(0)));
    const std::vector<MeTheta> draws(static_cast<std::size_t>(state.range(1)), sim1_theta(Family::SkewT));
    for (auto _ : state) {
        Matrix m = Parallel ? loglik_matrix_parallel(draws, data) : loglik_matrix_serial(draws, data);
        benchmark::DoNotOptimize(m.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}

void row_args(benchmark::internal::Benchmark *b) {
    for (Family f : {Family::SkewNormal, Family::SkewT, Family::SkewSlash}) {
        for (int n : {500, 5000}) {
            b->Args({n, static_cast<int>(f)});
        }
    }
}

} // namespace

BENCHMARK(BM_RowLogDensities<false>)->Apply(row_args);
BENCHMARK(BM_RowLogDensities<true>)->Apply(row_args);
BENCHMARK(BM_LoglikMatrix<false>)->Args({500, 200})->Args({100, 1000});
BENCHMARK(BM_LoglikMatrix<true>)->Args({500, 200})->Args({100, 1000});

BENCHMARK_MAIN();
