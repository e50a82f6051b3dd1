#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "prunedoc/errors.hpp"
#include "prunedoc/pruner.hpp"
#include "test_support.hpp"

namespace prunedoc {
namespace {

BinaryMask random_mask(std::size_t rows, std::size_t cols, double density, Rng& rng) {
    BinaryMask m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) m.set(r, c, rng.uniform() < density);
    }
    return m;
}

std::multiset<std::vector<std::uint8_t>> pixel_multiset(const PrunedTokenSet& set) {
    std::multiset<std::vector<std::uint8_t>> out;
    for (const auto& t : set.tokens) out.insert(t.pixels);
    return out;
}

TEST(Prune, KeepsMaskedPatchesWithRasterIndices) {
    const PatchGrid grid = extract_grid(GrayImage(4, 4), 2);
    const BinaryMask mask(2, 2, std::vector<std::uint8_t>{1, 0, 0, 1});
    const PrunedTokenSet set = prune(grid, mask);
    ASSERT_EQ(set.size(), 2u);
    EXPECT_EQ(set.tokens[0].assigned_index, 0u);
    EXPECT_EQ(set.tokens[1].assigned_index, 3u);
    EXPECT_EQ(set.tokens[1].row, 1u);
    EXPECT_EQ(set.tokens[1].col, 1u);
    EXPECT_EQ(set.strategy, IndexStrategy::preserved);
    EXPECT_DOUBLE_EQ(token_reduction(set), 50.0);
    EXPECT_NO_THROW(set.validate());
}

TEST(Prune, MaskShapeMismatch) {
    const PatchGrid grid = extract_grid(GrayImage(4, 4), 2);
    EXPECT_THROW(prune(grid, BinaryMask(2, 3)), ConfigError);
}

TEST(Prune, EmptyMaskGivesEmptyValidSet) {
    const PatchGrid grid = extract_grid(GrayImage(10, 6), 4);
    const PrunedTokenSet set = prune(grid, BinaryMask(grid.rows(), grid.cols()));
    EXPECT_TRUE(set.empty());
    EXPECT_DOUBLE_EQ(token_reduction(set), 100.0);
    EXPECT_NO_THROW(set.validate());
}

TEST(Prune, AllOnesReassemblesPaddedImage) {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t p = 1 + rng.below(6);
        const GrayImage img = testing::random_image(1 + rng.below(30), 1 + rng.below(30), rng);
        const PatchGrid grid = extract_grid(img, p);
        const PrunedTokenSet set = prune(grid, BinaryMask(grid.rows(), grid.cols(), 1));
        const std::size_t w = grid.cols() * p;
        std::vector<std::uint8_t> canvas(w * grid.rows() * p);
        for (const auto& t : set.tokens) {
            for (std::size_t y = 0; y < p; ++y) {
                std::copy_n(t.pixels.begin() + y * p, p, canvas.begin() + (t.row * p + y) * w + t.col * p);
            }
        }
        const GrayImage padded = pad_to_multiple(img, p);
        EXPECT_TRUE(std::equal(canvas.begin(), canvas.end(), padded.data().begin(), padded.data().end()));
    }
}

TEST(Reindex, StrategyExamples) {
    const PatchGrid grid = extract_grid(GrayImage(8, 8), 2);
    BinaryMask mask(4, 4);
    mask.set(0, 1, true);
    mask.set(2, 3, true);
    mask.set(3, 0, true);
    const PrunedTokenSet preserved = prune(grid, mask);

    auto indices = [](const PrunedTokenSet& s) {
        std::vector<std::size_t> out;
        for (const auto& t : s.tokens) out.push_back(t.assigned_index);
        return out;
    };
    EXPECT_EQ(indices(preserved), (std::vector<std::size_t>{1, 11, 12}));
    EXPECT_EQ(indices(reindex(preserved, IndexStrategy::ordered)), (std::vector<std::size_t>{0, 1, 2}));
    EXPECT_EQ(indices(reindex(preserved, IndexStrategy::constant)), (std::vector<std::size_t>{0, 0, 0}));
    EXPECT_EQ(reindex(preserved, IndexStrategy::preserved), preserved);

    const PrunedTokenSet random = reindex(preserved, IndexStrategy::random, 9);
    const auto drawn = indices(random);
    EXPECT_EQ(std::set<std::size_t>(drawn.begin(), drawn.end()).size(), 3u);
    for (auto i : drawn) EXPECT_LT(i, 16u);
    EXPECT_EQ(random, reindex(preserved, IndexStrategy::random, 9));
    EXPECT_NO_THROW(random.validate());

    EXPECT_THROW(reindex(random, IndexStrategy::ordered), StateError);
}

TEST(Reindex, PixelsAndPositionsUntouched) {
    Rng rng(4);
    for (int trial = 0; trial < 40; ++trial) {
        const PatchGrid grid = extract_grid(testing::random_image(1 + rng.below(40), 1 + rng.below(40), rng),
                                            1 + rng.below(5));
        const PrunedTokenSet base = prune(grid, random_mask(grid.rows(), grid.cols(), rng.uniform(), rng));
        for (auto s : {IndexStrategy::ordered, IndexStrategy::random, IndexStrategy::constant}) {
            const PrunedTokenSet other = reindex(base, s, rng.next_u64());
            EXPECT_EQ(other.strategy, s);
            ASSERT_EQ(other.size(), base.size());
            EXPECT_EQ(pixel_multiset(other), pixel_multiset(base));
            for (std::size_t i = 0; i < base.size(); ++i) {
                EXPECT_EQ(other.tokens[i].row, base.tokens[i].row);
                EXPECT_EQ(other.tokens[i].col, base.tokens[i].col);
            }
        }
    }
}

TEST(Prune, TokenReductionEqualsComplementOfCoverage) {
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const PatchGrid grid = extract_grid(GrayImage(1 + rng.below(64), 1 + rng.below(64)), 1 + rng.below(8));
        const BinaryMask mask = random_mask(grid.rows(), grid.cols(), rng.uniform(), rng);
        EXPECT_NEAR(token_reduction(prune(grid, mask)), 100.0 * (1.0 - coverage_ratio(mask)), 1e-12);
    }
}

TEST(Prune, MonotoneUnderDilation) {
    Rng rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        const PatchGrid grid = extract_grid(GrayImage(1 + rng.below(64), 1 + rng.below(64)), 1 + rng.below(6));
        const BinaryMask mask = random_mask(grid.rows(), grid.cols(), 0.2, rng);
        std::set<std::size_t> raw;
        std::set<std::size_t> pooled;
        for (const auto& t : prune(grid, mask).tokens) raw.insert(t.assigned_index);
        for (const auto& t : prune(grid, dilate(mask, 3)).tokens) pooled.insert(t.assigned_index);
        EXPECT_TRUE(std::includes(pooled.begin(), pooled.end(), raw.begin(), raw.end()));
    }
}

TEST(Validate, RejectsBrokenSets) {
    const PatchGrid grid = extract_grid(GrayImage(8, 8), 4);
    const PrunedTokenSet good = prune(grid, BinaryMask(2, 2, 1));
    auto expect_violation = [](const PrunedTokenSet& s) {
        try {
            s.validate();
            ADD_FAILURE() << "validate accepted a broken set";
        } catch (const ParseError& e) {
            EXPECT_EQ(e.failure(), ParseFailure::invariant_violation);
        }
    };
    PrunedTokenSet s = good;
    s.tokens[1].assigned_index = 7;
    expect_violation(s);
    s = good;
    std::swap(s.tokens[0], s.tokens[1]);
    expect_violation(s);
    s = good;
    s.tokens[2].pixels.pop_back();
    expect_violation(s);
    s = good;
    s.grid_cols = 3;
    expect_violation(s);
    s = reindex(good, IndexStrategy::ordered);
    s.tokens[3].assigned_index = 9;
    expect_violation(s);
    s = reindex(good, IndexStrategy::constant);
    s.tokens[0].assigned_index = 1;
    expect_violation(s);
    s = reindex(good, IndexStrategy::random, 1);
    s.tokens[0].assigned_index = s.tokens[1].assigned_index;
    expect_violation(s);
}

TEST(Strategy, NamesRoundTrip) {
    for (auto s : {IndexStrategy::preserved, IndexStrategy::ordered, IndexStrategy::random, IndexStrategy::constant}) {
        EXPECT_EQ(parse_strategy(to_string(s)), s);
    }
    EXPECT_FALSE(parse_strategy("sorted").has_value());
}

}  // namespace
}  // namespace prunedoc
