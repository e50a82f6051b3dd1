#include "prunedoc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "prunedoc/errors.hpp"
#include "prunedoc/rng.hpp"
#include "prunedoc/toyvit.hpp"

namespace prunedoc {

namespace {

struct Trial {
    ToyViTConfig cfg;
    std::size_t rows = 0;
    std::size_t cols = 0;
    GrayImage image{1, 1};
    BinaryMask mask;
};

Trial draw_trial(Rng& rng, const OracleOptions& options) {
    Trial t;
    const std::size_t head_choices[] = {1, 2, 4};
    t.cfg.layers = static_cast<std::size_t>(rng.between(1, 3));
    t.cfg.heads = head_choices[rng.below(3)];
    t.cfg.dim = t.cfg.heads * static_cast<std::size_t>(rng.between(2, 8));
    t.cfg.ffn = static_cast<std::size_t>(rng.between(8, 48));
    t.cfg.pos_mode = rng.below(2) == 0 ? PositionMode::learned_2d_table : PositionMode::sinusoidal_2d;
    t.cfg.patch_size = static_cast<std::size_t>(rng.between(2, 6));
    t.cfg.seed = rng.next_u64();
    do {
        t.rows = static_cast<std::size_t>(rng.between(1, static_cast<std::int64_t>(options.max_rows)));
        t.cols = static_cast<std::size_t>(rng.between(1, static_cast<std::int64_t>(options.max_cols)));
    } while (t.rows * t.cols < 2);

    const std::size_t width = t.cols * t.cfg.patch_size;
    const std::size_t height = t.rows * t.cfg.patch_size;
    std::vector<std::uint8_t> pixels(width * height);
    for (auto& px : pixels) px = static_cast<std::uint8_t>(rng.below(256));
    t.image = GrayImage(width, height, std::move(pixels));

    const double density = 0.2 + 0.7 * rng.uniform();
    std::vector<std::uint8_t> bits(t.rows * t.cols);
    for (auto& b : bits) b = rng.uniform() < density ? 1 : 0;
    if (std::count(bits.begin(), bits.end(), std::uint8_t{1}) == 0) {
        bits[rng.below(bits.size())] = 1;
    }
    t.mask = BinaryMask(t.rows, t.cols, std::move(bits));
    return t;
}

bool reproduces_raster(const PrunedTokenSet& set) {
    return std::all_of(set.tokens.begin(), set.tokens.end(), [&](const Token& t) {
        return t.assigned_index == t.row * set.grid_cols + t.col;
    });
}

}  // namespace

OracleReport run_oracle(const OracleOptions& options) {
    if (options.max_rows == 0 || options.max_cols == 0 || options.max_rows * options.max_cols < 2) {
        throw ConfigError("oracle grid must have at least two cells");
    }
    OracleReport report;
    report.trials = options.trials;
    report.divergence[0].strategy = IndexStrategy::constant;
    report.divergence[1].strategy = IndexStrategy::random;
    report.divergence[2].strategy = IndexStrategy::ordered;
    for (auto& d : report.divergence) d.min_max_abs_diff = std::numeric_limits<double>::infinity();

    Rng rng(options.seed);
    for (std::size_t trial = 0; trial < options.trials; ++trial) {
        const Trial t = draw_trial(rng, options);
        const ToyViT model(t.cfg, t.rows, t.cols);
        const PatchGrid grid = extract_grid(t.image, t.cfg.patch_size);
        const PrunedTokenSet preserved = prune(grid, t.mask);

        const TokenOutputs full = model.forward_full_masked(grid, t.mask);
        const TokenOutputs pruned = model.forward_pruned(preserved);
        const double abs_diff = max_abs_diff(pruned, full);
        report.equivalence_max_abs_diff = std::max(report.equivalence_max_abs_diff, abs_diff);
        for (std::size_t i = 0; i < full.values.size(); ++i) {
            const double denom = std::max(std::abs(full.values[i]), options.abs_floor);
            report.equivalence_max_rel_diff =
                std::max(report.equivalence_max_rel_diff, std::abs(pruned.values[i] - full.values[i]) / denom);
        }
        if (all_close(pruned, full, options.rel_tolerance, options.abs_floor)) {
            ++report.equivalence_passed;
        }

        const std::uint64_t reindex_seed = rng.next_u64();
        for (auto& d : report.divergence) {
            const PrunedTokenSet variant = reindex(preserved, d.strategy, reindex_seed);
            if (reproduces_raster(variant)) {
                ++d.excluded;
                continue;
            }
            ++d.eligible;
            const double diff = max_abs_diff(model.forward_pruned(variant), pruned);
            d.min_max_abs_diff = std::min(d.min_max_abs_diff, diff);
            if (diff > options.divergence_threshold) {
                ++d.diverged;
            }
        }
    }

    report.equivalence_ok = report.equivalence_passed == report.trials;
    for (auto& d : report.divergence) {
        if (d.eligible == 0) d.min_max_abs_diff = 0.0;
        report.divergence_ok = report.divergence_ok && d.rate() >= options.required_divergence_rate;
    }
    return report;
}

}  // namespace prunedoc
