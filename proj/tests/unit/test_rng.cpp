#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "prunedoc/rng.hpp"

namespace prunedoc {
namespace {

TEST(Rng, SameSeedSameStream) {
    Rng a(42);
    Rng b(42);
    for (int i = 0; i < 100; ++i) {
        EXPECT_EQ(a.next_u64(), b.next_u64());
    }
}

TEST(Rng, EngineMatchesReferenceMt19937_64) {
    Rng a(5489);
    std::uint64_t last = 0;
    for (int i = 0; i < 10000; ++i) last = a.next_u64();
    EXPECT_EQ(last, 9981545732273789042ULL);
}

TEST(Rng, BelowStaysInRange) {
    Rng rng(1);
    for (std::uint64_t bound : {1ULL, 2ULL, 3ULL, 7ULL, 1000ULL}) {
        for (int i = 0; i < 500; ++i) EXPECT_LT(rng.below(bound), bound);
    }
}

TEST(Rng, UniformInUnitInterval) {
    Rng rng(9);
    double sum = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / 20000.0, 0.5, 0.01);
}

TEST(Rng, GaussianMoments) {
    Rng rng(4);
    double sum = 0.0;
    double sq = 0.0;
    const int n = 40000;
    for (int i = 0; i < n; ++i) {
        const double g = rng.gaussian();
        sum += g;
        sq += g * g;
    }
    EXPECT_NEAR(sum / n, 0.0, 0.02);
    EXPECT_NEAR(sq / n, 1.0, 0.03);
}

TEST(Rng, SampleWithoutReplacementIsDistinct) {
    Rng rng(6);
    for (std::size_t range : {1u, 5u, 64u}) {
        for (std::size_t count = 0; count <= range; ++count) {
            const auto picks = sample_without_replacement(range, count, rng);
            ASSERT_EQ(picks.size(), count);
            std::set<std::size_t> unique(picks.begin(), picks.end());
            EXPECT_EQ(unique.size(), count);
            for (auto p : picks) EXPECT_LT(p, range);
        }
    }
}

TEST(Rng, ShuffleIsAPermutation) {
    Rng rng(7);
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    rng.shuffle(v);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(MixSeed, StreamsDiffer) {
    EXPECT_NE(mix_seed(0, 0), mix_seed(0, 1));
    EXPECT_NE(mix_seed(0, 0), mix_seed(1, 0));
    EXPECT_EQ(mix_seed(123, 4), mix_seed(123, 4));
}

}  // namespace
}  // namespace prunedoc
