#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace prunedoc {

/// Seeded generator with platform-independent derived distributions.
///
/// std::mt19937_64 itself is fully specified by the standard, but the
/// distribution adaptors (uniform_int_distribution, normal_distribution,
/// std::shuffle) are implementation-defined. Every seeded artifact in this
/// library goes through the helpers below so that outputs are identical
/// across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform();

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound);

    /// Uniform integer in [lo, hi] (inclusive).
    std::int64_t between(std::int64_t lo, std::int64_t hi);

    /// Standard normal via Box-Muller.
    double gaussian();
    double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

    template <typename T>
    void shuffle(std::span<T> values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

    template <typename T>
    void shuffle(std::vector<T>& values) {
        shuffle(std::span<T>(values));
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// SplitMix64 finalizer; used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// First `count` entries of a seeded Fisher-Yates permutation of [0, range).
std::vector<std::size_t> sample_without_replacement(std::size_t range, std::size_t count, Rng& rng);

}  // namespace prunedoc
