#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "prunedoc/imagegrid.hpp"
#include "prunedoc/maskops.hpp"
#include "prunedoc/pruner.hpp"

namespace prunedoc {

enum class PositionMode {
    learned_2d_table,  ///< one learned vector per grid cell
    sinusoidal_2d,     ///< sin/cos of row in the first half, of col in the second
};

struct ToyViTConfig {
    std::size_t layers = 2;
    std::size_t dim = 16;
    std::size_t heads = 2;
    std::size_t ffn = 32;
    PositionMode pos_mode = PositionMode::learned_2d_table;
    std::size_t patch_size = 4;
    std::uint64_t seed = 0;

    /// Throws ConfigError unless counts are positive and heads divides dim.
    void validate() const;
};

/// Final per-token vectors, one row of `dim` values per token.
struct TokenOutputs {
    std::size_t count = 0;
    std::size_t dim = 0;
    std::vector<double> values;

    [[nodiscard]] std::span<const double> row(std::size_t i) const {
        return std::span<const double>(values).subspan(i * dim, dim);
    }
};

/// Softmax over the entries with keep[i] != 0; the others get exactly 0.
/// Throws DegenerateDataError when nothing is kept.
std::vector<double> masked_softmax(std::span<const double> logits, std::span<const std::uint8_t> keep);

/// Small pre-norm transformer encoder with seeded Gaussian weights and
/// additive position encodings keyed on grid (row, col). Per-token layer norm
/// only, so masking keys and dropping tokens are interchangeable.
class ToyViT {
public:
    ToyViT(const ToyViTConfig& config, std::size_t grid_rows, std::size_t grid_cols);
    ~ToyViT();
    ToyViT(ToyViT&&) noexcept;
    ToyViT& operator=(ToyViT&&) noexcept;

    [[nodiscard]] const ToyViTConfig& config() const noexcept;
    [[nodiscard]] std::size_t grid_rows() const noexcept;
    [[nodiscard]] std::size_t grid_cols() const noexcept;

    /// Embeds every patch at its own position, masks attention to dropped
    /// keys, and returns outputs at retained positions in raster order.
    TokenOutputs forward_full_masked(const PatchGrid& grid, const BinaryMask& mask) const;

    /// Embeds only the set's tokens, positioned by assigned_index, with full
    /// attention among them. Outputs follow token order.
    TokenOutputs forward_pruned(const PrunedTokenSet& set) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Largest |a - b| over all entries. Throws ShapeError on shape mismatch.
double max_abs_diff(const TokenOutputs& a, const TokenOutputs& b);
/// True when every entry satisfies |a - b| <= max(rel * |b|, abs_floor).
bool all_close(const TokenOutputs& a, const TokenOutputs& b, double rel, double abs_floor);

}  // namespace prunedoc
