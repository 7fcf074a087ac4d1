// Microbenchmarks for the hot paths: the dense forward/backward passes at
// the full 512-unit width, the reduced width the CLI defaults steer desk
// machines toward, and the supporting data plumbing.

#include <benchmark/benchmark.h>

#include <random>

#include "procaudit/dataset.hpp"
#include "procaudit/matrix.hpp"
#include "procaudit/network.hpp"
#include "procaudit/normalize.hpp"
#include "procaudit/rng.hpp"
#include "procaudit/synthgen.hpp"
#include "procaudit/trainer.hpp"

using namespace procaudit;

namespace {

NetworkConfig config_for(std::size_t hidden, std::size_t classes) {
    NetworkConfig cfg;
    cfg.hidden_dim = hidden;
    cfg.output_classes = classes;
    cfg.dropout_ratio = 0.2;
    cfg.seed = 1;
    return cfg;
}

Vector sample_input(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Vector x(8);
    for (double& v : x) v = uniform_in(rng, 0.0, 1.0);
    return x;
}

void forward_infer(benchmark::State& state) {
    const NetworkConfig cfg =
        config_for(static_cast<std::size_t>(state.range(0)), 2);
    const NetworkParameters params = init(cfg);
    const Vector x = sample_input(7);
    ForwardCache cache;
    for (auto _ : state) {
        forward(cfg, params, x, RunMode::infer, nullptr, cache);
        benchmark::DoNotOptimize(cache.probs.data());
    }
}
BENCHMARK(forward_infer)->Arg(128)->Arg(512);

void forward_train(benchmark::State& state) {
    const NetworkConfig cfg =
        config_for(static_cast<std::size_t>(state.range(0)), 2);
    const NetworkParameters params = init(cfg);
    const Vector x = sample_input(7);
    std::mt19937_64 rng(11);
    ForwardCache cache;
    for (auto _ : state) {
        forward(cfg, params, x, RunMode::train, &rng, cache);
        benchmark::DoNotOptimize(cache.probs.data());
    }
}
BENCHMARK(forward_train)->Arg(128)->Arg(512);

void forward_backward(benchmark::State& state) {
    const NetworkConfig cfg =
        config_for(static_cast<std::size_t>(state.range(0)), 5);
    const NetworkParameters params = init(cfg);
    const Vector x = sample_input(7);
    std::mt19937_64 rng(11);
    ForwardCache cache;
    Gradients grads = NetworkParameters::shaped(cfg);
    for (auto _ : state) {
        grads.zero();
        forward(cfg, params, x, RunMode::train, &rng, cache);
        backward(cfg, params, cache, 3, grads);
        benchmark::DoNotOptimize(grads.w1.data.data());
    }
}
BENCHMARK(forward_backward)->Arg(128)->Arg(512);

void sgd_update(benchmark::State& state) {
    const NetworkConfig cfg =
        config_for(static_cast<std::size_t>(state.range(0)), 5);
    NetworkParameters params = init(cfg);
    Gradients grads = NetworkParameters::shaped(cfg);
    grads.zero();
    for (auto _ : state) {
        sgd_step(params, grads, 1e-9);
        benchmark::DoNotOptimize(params.w1.data.data());
    }
}
BENCHMARK(sgd_update)->Arg(512);

void matmul_square(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(3);
    Matrix a(n, n), b(n, n);
    for (double& v : a.data) v = uniform_in(rng, -1.0, 1.0);
    for (double& v : b.data) v = uniform_in(rng, -1.0, 1.0);
    for (auto _ : state) {
        Matrix c = matmul(a, b);
        benchmark::DoNotOptimize(c.data.data());
    }
}
BENCHMARK(matmul_square)->Arg(64)->Arg(256);

void generate_rows(benchmark::State& state) {
    GeneratorConfig gen;
    gen.n = static_cast<std::size_t>(state.range(0));
    gen.label_noise = 0.1;
    gen.seed = 21;
    for (auto _ : state) {
        Dataset ds = generate(gen);
        benchmark::DoNotOptimize(ds.records.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(generate_rows)->Arg(10000);

void normalize_dataset(benchmark::State& state) {
    GeneratorConfig gen;
    gen.n = 10000;
    gen.seed = 21;
    const Dataset ds = generate(gen);
    const NormalizationStats stats = fit(ds);
    for (auto _ : state) {
        Matrix scaled = transform(ds, stats);
        benchmark::DoNotOptimize(scaled.data.data());
    }
    state.SetItemsProcessed(state.iterations() * ds.size());
}
BENCHMARK(normalize_dataset);

void partition(benchmark::State& state) {
    for (auto _ : state) {
        auto folds = partition_folds(50000, 10, 99);
        benchmark::DoNotOptimize(folds.data());
    }
}
BENCHMARK(partition);

void train_epoch(benchmark::State& state) {
    GeneratorConfig gen;
    gen.n = 1000;
    gen.seed = 21;
    const Dataset ds = generate(gen);
    const LabelView view = derive_labels(ds, LabelMode::binary);
    const Matrix features = transform(ds, fit(ds));

    NetworkConfig cfg = config_for(static_cast<std::size_t>(state.range(0)),
                                   view.class_count);
    TrainOptions opts;
    opts.epochs = 1;
    for (auto _ : state) {
        NetworkParameters params = init(cfg);
        auto losses = train_epochs(cfg, params, features, view.labels, opts,
                                   /*seed=*/5);
        benchmark::DoNotOptimize(losses.data());
    }
    state.SetItemsProcessed(state.iterations() * ds.size());
}
BENCHMARK(train_epoch)->Arg(128)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
