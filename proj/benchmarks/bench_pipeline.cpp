#include <benchmark/benchmark.h>

#include "prunedoc/classifier.hpp"
#include "prunedoc/costmodel.hpp"
#include "prunedoc/maskops.hpp"
#include "prunedoc/pruner.hpp"
#include "prunedoc/rng.hpp"
#include "prunedoc/synthdoc.hpp"

namespace {

using namespace prunedoc;

const SynthDocument& a4_page() {
    static const SynthDocument doc = generate(SynthSpec::page_default(), 1);
    return doc;
}

BinaryMask random_mask(std::size_t rows, std::size_t cols, double density, std::uint64_t seed) {
    Rng rng(seed);
    BinaryMask m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) m.set(r, c, rng.uniform() < density);
    }
    return m;
}

void BM_ExtractGrid(benchmark::State& state) {
    const GrayImage& img = a4_page().image;
    for (auto _ : state) {
        benchmark::DoNotOptimize(extract_grid(img, static_cast<std::size_t>(state.range(0))));
    }
}
BENCHMARK(BM_ExtractGrid)->Arg(14)->Arg(28)->Arg(56)->Unit(benchmark::kMillisecond);

void BM_ClassifyGrid(benchmark::State& state) {
    const auto patch = static_cast<std::size_t>(state.range(0));
    const PatchGrid grid = extract_grid(a4_page().image, patch);
    const ClassifierModel model = init_params(patch, kDefaultHiddenDim, 7).to_model();
    for (auto _ : state) {
        benchmark::DoNotOptimize(classify_grid(model, grid));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * grid.size()));
}
BENCHMARK(BM_ClassifyGrid)->Arg(14)->Arg(28)->Unit(benchmark::kMillisecond);

void BM_Dilate(benchmark::State& state) {
    const BinaryMask mask = random_mask(126, 89, 0.3, 3);
    const auto k = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(dilate(mask, k));
    }
}
BENCHMARK(BM_Dilate)->Arg(1)->Arg(3)->Arg(7);

void BM_PruneAndSerialize(benchmark::State& state) {
    const PatchGrid grid = extract_grid(a4_page().image, 28);
    const BinaryMask mask = random_mask(grid.rows(), grid.cols(), 0.35, 4);
    for (auto _ : state) {
        const PrunedTokenSet set = prune(grid, mask);
        benchmark::DoNotOptimize(serialize(set));
    }
}
BENCHMARK(BM_PruneAndSerialize)->Unit(benchmark::kMillisecond);

void BM_ReductionReport(benchmark::State& state) {
    const PipelineProfile profile = builtin_profile_3b();
    std::size_t retained = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(reduction_report(profile, 11214, retained));
        retained = (retained + 97) % 11214;
    }
}
BENCHMARK(BM_ReductionReport);

void BM_TrainEpoch(benchmark::State& state) {
    Rng rng(5);
    PatchDataset data(28);
    std::vector<std::uint8_t> px(28 * 28);
    for (int i = 0; i < 2048; ++i) {
        for (auto& v : px) v = static_cast<std::uint8_t>(rng.below(256));
        data.add(px, static_cast<std::uint8_t>(i % 2));
    }
    TrainConfig cfg;
    cfg.epochs = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(train(data, cfg));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * data.size()));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

}  // namespace
