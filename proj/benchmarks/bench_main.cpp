#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "fedsim/aggregation.hpp"
#include "fedsim/dp.hpp"
#include "fedsim/model.hpp"

using namespace fedsim;

namespace {

UpdateSet random_set(int K, int d, std::uint64_t seed) {
    RngStream rng = RngStream::derive(seed, {0xbe});
    UpdateSet us;
    for (int k = 0; k < K; ++k) {
        ParamVector w(d);
        for (int j = 0; j < d; ++j) w[j] = rng.uniform(-1.0, 1.0);
        us.updates.push_back({k, w, 100, false});
    }
    return us;
}

void BM_FedAvg(benchmark::State& state) {
    UpdateSet us = random_set(static_cast<int>(state.range(0)), 51466, 1);
    for (auto _ : state) benchmark::DoNotOptimize(fed_avg(us));
}

void BM_Krum(benchmark::State& state) {
    int K = static_cast<int>(state.range(0));
    UpdateSet us = random_set(K, 51466, 2);
    for (auto _ : state) benchmark::DoNotOptimize(krum_select(us, K / 5));
}

void BM_TrimmedMean(benchmark::State& state) {
    int K = static_cast<int>(state.range(0));
    UpdateSet us = random_set(K, 51466, 3);
    for (auto _ : state) benchmark::DoNotOptimize(trimmed_mean(us, K / 5));
}

void BM_PerturbUpdate(benchmark::State& state) {
    RngStream rng = RngStream::derive(4, {0xd9});
    ParamVector w(51466);
    for (Eigen::Index j = 0; j < w.size(); ++j) w[j] = rng.uniform(-1.0, 1.0);
    auto spec = laplace_scale(1.0, 50, 100, {8.0});
    for (auto _ : state) benchmark::DoNotOptimize(perturb_update(w, spec, rng));
}

void BM_LocalTrain(benchmark::State& state) {
    Dataset ds = generate_synthetic(100, 784, 10, 5);
    ModelSpec spec = ModelSpec::mlp(784, 64, 10);
    ParamVector w = init_params(spec, 1);
    std::vector<int> idx(ds.size());
    std::iota(idx.begin(), idx.end(), 0);
    RngStream rng = RngStream::derive(6, {0x11});
    for (auto _ : state) {
        benchmark::DoNotOptimize(local_train(spec, w, ds, idx, 5, 10, 0.01, rng));
    }
}

void BM_Evaluate(benchmark::State& state) {
    Dataset ds = generate_synthetic(2000, 784, 10, 7);
    ModelSpec spec = ModelSpec::mlp(784, 64, 10);
    ParamVector w = init_params(spec, 1);
    for (auto _ : state) benchmark::DoNotOptimize(evaluate(spec, w, ds));
}

}  // namespace

BENCHMARK(BM_FedAvg)->Arg(100);
BENCHMARK(BM_Krum)->Arg(20)->Arg(100);
BENCHMARK(BM_TrimmedMean)->Arg(100);
BENCHMARK(BM_PerturbUpdate);
BENCHMARK(BM_LocalTrain)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Evaluate)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
