#include <benchmark/benchmark.h>

#include <map>
#include <numeric>
#include <random>

#include "mpdgga/classifier_eval.hpp"
#include "mpdgga/info_theory.hpp"
#include "mpdgga/subset_criterion.hpp"

using namespace mpdgga;

namespace {

const Dataset& dataset(std::size_t d) {
    static std::map<std::size_t, Dataset> cache;
    auto it = cache.find(d);
    if (it == cache.end()) {
        SyntheticSpec spec;
        spec.n_rows = 2000;
        spec.n_informative = d / 10;
        spec.n_redundant = d / 10;
        spec.n_noise = d - 2 * (d / 10);
        it = cache.emplace(d, generate_synthetic(spec)).first;
    }
    return it->second;
}

void BM_OmegaSerial(benchmark::State& state) {
    const auto& ds = dataset(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(build_omega(ds, Execution::serial));
}

void BM_OmegaParallel(benchmark::State& state) {
    const auto& ds = dataset(static_cast<std::size_t>(state.range(0)));
    const int threads = static_cast<int>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(build_omega(ds, Execution::parallel, threads));
}

void knn(benchmark::State& state, Execution exec) {
    const auto& ds = dataset(60);
    const Mask all(ds.d, 1);
    const int threads = static_cast<int>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(knn_predict(ds, ds.train_rows, ds.val_rows, all, 5, exec, threads));
}
void BM_KnnSerial(benchmark::State& state) { knn(state, Execution::serial); }
void BM_KnnParallel(benchmark::State& state) { knn(state, Execution::parallel); }

struct SweepCase {
    GainRatioMatrix omega;
    Mask a, b;
};

SweepCase sweep_case(std::size_t d) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> fc(d), ff(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        fc[i] = u(rng);
        for (std::size_t j = 0; j < d; ++j)
            if (i != j) ff[i * d + j] = u(rng);
    }
    SweepCase c{GainRatioMatrix::from_values(fc, ff), Mask(d), Mask(d)};
    for (std::size_t i = 0; i < d; ++i) {
        c.a[i] = rng() & 1u;
        c.b[i] = rng() & 1u;
    }
    return c;
}

void BM_SweepIncremental(benchmark::State& state) {
    const auto c = sweep_case(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(sweep_crossover(c.a, c.b, c.omega));
}

// Rescores both children from scratch at every cut point.
void BM_SweepNaive(benchmark::State& state) {
    const auto c = sweep_case(static_cast<std::size_t>(state.range(0)));
    const std::size_t d = c.a.size();
    for (auto _ : state) {
        double best = -1.0;
        std::size_t best_k = 1;
        for (std::size_t k = 1; k < d; ++k) {
            Mask x(c.b), y(c.a);
            std::copy(c.a.begin(), c.a.begin() + static_cast<std::ptrdiff_t>(k), x.begin());
            std::copy(c.b.begin(), c.b.begin() + static_cast<std::ptrdiff_t>(k), y.begin());
            const double j = std::max(score(x, c.omega).j_value, score(y, c.omega).j_value);
            if (j > best) {
                best = j;
                best_k = k;
            }
        }
        benchmark::DoNotOptimize(best_k);
    }
}

}  // namespace

BENCHMARK(BM_OmegaSerial)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OmegaParallel)->Args({100, 2})->Args({100, 4})->Args({200, 4})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KnnSerial)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KnnParallel)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepIncremental)->Arg(30)->Arg(100)->Arg(300);
BENCHMARK(BM_SweepNaive)->Arg(30)->Arg(100)->Arg(300);

BENCHMARK_MAIN();
