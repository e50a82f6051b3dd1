#include <benchmark/benchmark.h>

#include "prunedoc/oracle.hpp"
#include "prunedoc/rng.hpp"
#include "prunedoc/toyvit.hpp"

namespace {

using namespace prunedoc;

void BM_ToyViTForward(benchmark::State& state) {
    const auto side = static_cast<std::size_t>(state.range(0));
    const bool pruned = state.range(1) != 0;
    ToyViTConfig cfg;
    cfg.dim = 32;
    cfg.heads = 4;
    cfg.ffn = 64;
    Rng rng(2);
    std::vector<std::uint8_t> pixels(side * side * cfg.patch_size * cfg.patch_size);
    for (auto& v : pixels) v = static_cast<std::uint8_t>(rng.below(256));
    const GrayImage img(side * cfg.patch_size, side * cfg.patch_size, std::move(pixels));
    const PatchGrid grid = extract_grid(img, cfg.patch_size);
    BinaryMask mask(side, side);
    for (std::size_t r = 0; r < side; ++r) {
        for (std::size_t c = 0; c < side; ++c) mask.set(r, c, rng.uniform() < 0.35);
    }
    mask.set(0, 0, true);
    const ToyViT model(cfg, side, side);
    const PrunedTokenSet set = prune(grid, mask);
    for (auto _ : state) {
        if (pruned) {
            benchmark::DoNotOptimize(model.forward_pruned(set));
        } else {
            benchmark::DoNotOptimize(model.forward_full_masked(grid, mask));
        }
    }
}
BENCHMARK(BM_ToyViTForward)->ArgsProduct({{8, 16, 32}, {0, 1}})->ArgNames({"side", "pruned"});

void BM_Oracle(benchmark::State& state) {
    OracleOptions options;
    options.trials = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_oracle(options));
    }
}
BENCHMARK(BM_Oracle)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
