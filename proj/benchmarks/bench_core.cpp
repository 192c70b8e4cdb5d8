#include <benchmark/benchmark.h>

#include "tnt/tnt.hpp"

namespace {

tnt::Shape cube(tnt::Index n, tnt::Index size) { return tnt::Shape(static_cast<std::size_t>(n), size); }

void BM_Add(benchmark::State& state) {
    tnt::Rng rng(1);
    const auto shape = cube(8, state.range(0));
    const auto a = tnt::random_tt(shape, 20, rng), b = tnt::random_tt(shape, 20, rng);
    for (auto _ : state) benchmark::DoNotOptimize(tnt::add(a, b));
}
BENCHMARK(BM_Add)->Arg(15)->Arg(45)->Unit(benchmark::kMicrosecond);

void BM_AddBatched(benchmark::State& state) {
    tnt::Rng rng(1);
    const auto shape = cube(8, state.range(0));
    const auto a = tnt::random_tt_batched(32, shape, 20, rng), b = tnt::random_tt_batched(32, shape, 20, rng);
    for (auto _ : state) benchmark::DoNotOptimize(tnt::add(a, b));
    state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_AddBatched)->Arg(15)->Arg(45)->Unit(benchmark::kMillisecond);

void BM_Hadamard(benchmark::State& state) {
    tnt::Rng rng(2);
    const auto shape = cube(8, 15);
    const auto r = state.range(0);
    const auto a = tnt::random_tt(shape, r, rng), b = tnt::random_tt(shape, r, rng);
    for (auto _ : state) benchmark::DoNotOptimize(tnt::hadamard(a, b));
}
BENCHMARK(BM_Hadamard)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_TtSvd(benchmark::State& state) {
    tnt::Rng rng(3);
    const auto x = tnt::full(tnt::random_tt(cube(4, state.range(0)), 20, rng));
    const auto spec = tnt::TruncationSpec::rank(20);
    for (auto _ : state) benchmark::DoNotOptimize(tnt::tt_svd(x, spec));
}
BENCHMARK(BM_TtSvd)->Arg(15)->Arg(25)->Unit(benchmark::kMillisecond);

void BM_Round(benchmark::State& state) {
    tnt::Rng rng(4);
    const auto t = tnt::random_tt(cube(8, 15), state.range(0), rng);
    const auto doubled = tnt::add(t, t);
    const auto spec = tnt::TruncationSpec::relative(1e-10);
    for (auto _ : state) benchmark::DoNotOptimize(tnt::round(doubled, spec));
}
BENCHMARK(BM_Round)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_Maxvol(benchmark::State& state) {
    tnt::Rng rng(5);
    const auto a = tnt::random_dense({state.range(0), 20}, rng);
    for (auto _ : state) benchmark::DoNotOptimize(tnt::maxvol(a));
}
BENCHMARK(BM_Maxvol)->Arg(100)->Arg(900)->Unit(benchmark::kMicrosecond);

void BM_CrossIdentity(benchmark::State& state) {
    tnt::Rng rng(6);
    const auto t = tnt::random_tt(cube(8, state.range(0)), 10, rng);
    tnt::CrossConfig cfg;
    cfg.initial_rank = 10;
    cfg.max_rank = 10;
    cfg.target_eps = 1e-10;
    for (auto _ : state) benchmark::DoNotOptimize(tnt::elementwise(t, [](double v) { return v; }, cfg));
}
BENCHMARK(BM_CrossIdentity)->Arg(15)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
