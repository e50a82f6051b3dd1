#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prunedoc/imagegrid.hpp"
#include "prunedoc/maskops.hpp"

namespace prunedoc {

/// How retained tokens are numbered for the downstream position encoding.
enum class IndexStrategy {
    preserved,  ///< original raster index row * cols + col
    ordered,    ///< 0 .. L-1 in sequence order
    random,     ///< L distinct seeded draws from [0, rows * cols)
    constant,   ///< all zero
};

std::string_view to_string(IndexStrategy strategy) noexcept;
std::optional<IndexStrategy> parse_strategy(std::string_view name) noexcept;

struct Token {
    std::size_t assigned_index = 0;
    std::size_t row = 0;
    std::size_t col = 0;
    std::vector<std::uint8_t> pixels;  // patch_size^2

    friend bool operator==(const Token&, const Token&) = default;
};

/// Retained patches with their assigned indices. Tokens are always stored in
/// raster order of their original position; only assigned_index depends on
/// the strategy. An empty token list (fully pruned image) is valid.
struct PrunedTokenSet {
    std::size_t patch_size = 0;
    std::size_t grid_rows = 0;
    std::size_t grid_cols = 0;
    std::size_t image_width = 0;
    std::size_t image_height = 0;
    IndexStrategy strategy = IndexStrategy::preserved;
    std::vector<Token> tokens;

    [[nodiscard]] std::size_t grid_size() const noexcept { return grid_rows * grid_cols; }
    [[nodiscard]] std::size_t size() const noexcept { return tokens.size(); }
    [[nodiscard]] bool empty() const noexcept { return tokens.empty(); }

    /// Checks every structural and strategy invariant; throws
    /// ParseError(invariant_violation) describing the first failure.
    void validate() const;

    friend bool operator==(const PrunedTokenSet&, const PrunedTokenSet&) = default;
};

/// Keeps the patches whose mask bit is set, with their original indices.
/// Throws ConfigError when mask and grid dimensions differ.
PrunedTokenSet prune(const PatchGrid& grid, const BinaryMask& mask);

/// Renumbers a preserved set under another strategy. Pixels and positions
/// are untouched. Throws StateError when the input is not preserved.
PrunedTokenSet reindex(const PrunedTokenSet& set, IndexStrategy strategy, std::uint64_t seed = 0);

/// 100 * (1 - L / (rows * cols)).
double token_reduction(const PrunedTokenSet& set);

// -- PTOK1 interchange --------------------------------------------------------

inline constexpr int kTokenFormatVersion = 1;
inline constexpr std::string_view kTokenPixelMagic{"PTOKPX1\0", 8};

/// JSON manifest plus the sidecar pixel blob it names.
struct TokenPayload {
    std::string manifest;
    std::vector<std::uint8_t> blob;
};

TokenPayload serialize(const PrunedTokenSet& set, const std::string& pixels_file = "tokens.ptok.bin");
/// Throws ParseError with a failure kind that distinguishes bad magic,
/// version mismatch, truncation, malformed JSON, and invariant violations.
PrunedTokenSet deserialize(const TokenPayload& payload);

struct TokenFiles {
    std::filesystem::path manifest;
    std::filesystem::path blob;
};

/// `<stem>.ptok.json` and `<stem>.ptok.bin`.
TokenFiles token_paths(const std::filesystem::path& stem);
TokenFiles write_tokens(const PrunedTokenSet& set, const std::filesystem::path& stem);
/// Reads a manifest and the blob it names (resolved next to the manifest).
PrunedTokenSet read_tokens(const std::filesystem::path& manifest_path);

}  // namespace prunedoc
