#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "prunedoc/pruner.hpp"

namespace prunedoc {

/// Randomised check of the index-preservation laws on the toy transformer.
struct OracleOptions {
    std::size_t max_rows = 8;
    std::size_t max_cols = 8;
    std::size_t trials = 100;
    std::uint64_t seed = 0;
    double rel_tolerance = 1e-5;
    double abs_floor = 1e-7;
    double divergence_threshold = 1e-3;  ///< max |diff| that counts as diverged
    double required_divergence_rate = 0.95;
};

struct StrategyDivergence {
    IndexStrategy strategy = IndexStrategy::ordered;
    std::size_t eligible = 0;   ///< trials where some index differs from raster
    std::size_t excluded = 0;   ///< trials where the strategy reproduces raster indices
    std::size_t diverged = 0;
    double min_max_abs_diff = 0.0;

    [[nodiscard]] double rate() const noexcept {
        return eligible == 0 ? 1.0 : static_cast<double>(diverged) / static_cast<double>(eligible);
    }
};

struct OracleReport {
    std::size_t trials = 0;
    std::size_t equivalence_passed = 0;
    double equivalence_max_abs_diff = 0.0;
    double equivalence_max_rel_diff = 0.0;
    std::array<StrategyDivergence, 3> divergence{};  // constant, random, ordered
    bool equivalence_ok = true;
    bool divergence_ok = true;

    [[nodiscard]] bool passed() const noexcept { return equivalence_ok && divergence_ok; }
};

/// Each trial draws a configuration, grid (<= max_rows x max_cols, >= 2
/// cells), image, non-empty mask and weight seed; compares the pruned run
/// against the masked full run, then each re-indexed run against the
/// preserved run.
OracleReport run_oracle(const OracleOptions& options);

}  // namespace prunedoc
