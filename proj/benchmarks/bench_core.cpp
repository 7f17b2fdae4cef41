#include <benchmark/benchmark.h>

#include "monolip/certify.hpp"
#include "monolip/constraints.hpp"
#include "monolip/data.hpp"
#include "monolip/network.hpp"
#include "monolip/random.hpp"
#include "monolip/training.hpp"

namespace {

using namespace monolip;

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(rows, cols, 0.0);
    for (double& x : m.data()) x = rng.uniform(-1.0, 1.0);
    return m;
}

NetworkSpec trigger_profile() {
    NetworkSpec spec;
    spec.input_dim = 4;
    spec.hidden_widths = {20, 20};
    spec.group_size = 20;
    spec.lambda = 2.0;
    spec.monotone_indices = {0, 1, 3};
    spec.seed = 1;
    return spec;
}

void BM_OneNorm(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix m = random_matrix(n, n, 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(one_norm(m));
    }
}
BENCHMARK(BM_OneNorm)->Arg(16)->Arg(64)->Arg(128);

void BM_GroupSort(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Rng rng(11);
    Vector v(n);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(group_sort(v, n));
    }
}
BENCHMARK(BM_GroupSort)->Arg(20)->Arg(128);

void BM_Forward(benchmark::State& state) {
    MonotonicNetwork net = MonotonicNetwork::initialize(trigger_profile());
    const EffectiveState eff = compute_effective(net);
    const Vector x{0.5, -0.2, 1.3, 0.8};
    for (auto _ : state) {
        benchmark::DoNotOptimize(forward_value(net, eff, x));
    }
}
BENCHMARK(BM_Forward);

void BM_ForwardBackward(benchmark::State& state) {
    MonotonicNetwork net = MonotonicNetwork::initialize(trigger_profile());
    const Vector x{0.5, -0.2, 1.3, 0.8};
    for (auto _ : state) {
        benchmark::DoNotOptimize(backward(net, x, 1.0));
    }
}
BENCHMARK(BM_ForwardBackward);

void BM_Projection(benchmark::State& state) {
    Rng rng(13);
    NetworkSpec spec = trigger_profile();
    spec.norm_mode = NormMode::project;
    MonotonicNetwork net = MonotonicNetwork::initialize(spec);
    for (auto _ : state) {
        state.PauseTiming();
        for (auto& layer : net.mutable_layers()) {
            for (double& w : layer.weights.data()) w = rng.uniform(-1.0, 1.0);
        }
        state.ResumeTiming();
        project_in_place(net);
    }
}
BENCHMARK(BM_Projection);

void BM_TrainEpoch(benchmark::State& state) {
    Rng rng(17);
    TrainingSet data;
    for (int i = 0; i < 1024; ++i) {
        Vector x(4);
        for (double& v : x) v = rng.uniform(-2.0, 2.0);
        data.inputs.push_back(std::move(x));
        data.targets.push_back(rng.uniform01() < 0.5 ? 1.0 : 0.0);
    }
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.batch_size = 256;
    for (auto _ : state) {
        state.PauseTiming();
        MonotonicNetwork net = MonotonicNetwork::initialize(trigger_profile());
        state.ResumeTiming();
        train(net, data, cfg);
    }
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

void BM_CertifyLipschitz(benchmark::State& state) {
    MonotonicNetwork net = MonotonicNetwork::initialize(trigger_profile());
    const Box box{Vector(4, -2.0), Vector(4, 2.0)};
    for (auto _ : state) {
        benchmark::DoNotOptimize(certify_lipschitz(net, 10000, box, 3));
    }
}
BENCHMARK(BM_CertifyLipschitz)->Unit(benchmark::kMillisecond);

void BM_GenerateEvents(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(generate_synthetic(10000, PopulationFractions{}, 5));
    }
}
BENCHMARK(BM_GenerateEvents)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
