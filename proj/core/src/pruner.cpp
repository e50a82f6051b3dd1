#include "prunedoc/pruner.hpp"

#include <algorithm>
#include <unordered_set>

#include "prunedoc/errors.hpp"
#include "prunedoc/rng.hpp"

namespace prunedoc {

std::string_view to_string(IndexStrategy strategy) noexcept {
    switch (strategy) {
        case IndexStrategy::preserved: return "preserved";
        case IndexStrategy::ordered: return "ordered";
        case IndexStrategy::random: return "random";
        case IndexStrategy::constant: return "constant";
    }
    return "unknown";
}

std::optional<IndexStrategy> parse_strategy(std::string_view name) noexcept {
    for (const auto s : {IndexStrategy::preserved, IndexStrategy::ordered, IndexStrategy::random,
                         IndexStrategy::constant}) {
        if (to_string(s) == name) {
            return s;
        }
    }
    return std::nullopt;
}

namespace {

[[noreturn]] void violation(const std::string& what) {
    throw ParseError(ParseFailure::invariant_violation, what);
}

}  // namespace

void PrunedTokenSet::validate() const {
    if (patch_size == 0 || grid_rows == 0 || grid_cols == 0) {
        violation("patch size and grid dimensions must be positive");
    }
    if (image_width == 0 || image_height == 0 ||
        (image_width + patch_size - 1) / patch_size != grid_cols ||
        (image_height + patch_size - 1) / patch_size != grid_rows) {
        violation("image dimensions do not match the grid");
    }
    const std::size_t area = grid_size();
    const std::size_t patch_pixels = patch_size * patch_size;
    std::unordered_set<std::size_t> seen_assigned;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const Token& t = tokens[i];
        if (t.row >= grid_rows || t.col >= grid_cols) {
            violation("token " + std::to_string(i) + " lies outside the grid");
        }
        if (t.pixels.size() != patch_pixels) {
            violation("token " + std::to_string(i) + " has the wrong pixel count");
        }
        const std::size_t raster = t.row * grid_cols + t.col;
        if (i > 0) {
            const Token& prev = tokens[i - 1];
            if (prev.row * grid_cols + prev.col >= raster) {
                violation("tokens are not in strictly ascending raster order");
            }
        }
        switch (strategy) {
            case IndexStrategy::preserved:
                if (t.assigned_index != raster) violation("preserved index differs from raster index");
                break;
            case IndexStrategy::ordered:
                if (t.assigned_index != i) violation("ordered index differs from sequence position");
                break;
            case IndexStrategy::constant:
                if (t.assigned_index != 0) violation("constant strategy requires index 0");
                break;
            case IndexStrategy::random:
                if (t.assigned_index >= area || !seen_assigned.insert(t.assigned_index).second) {
                    violation("random indices must be distinct and inside the grid");
                }
                break;
        }
    }
}

PrunedTokenSet prune(const PatchGrid& grid, const BinaryMask& mask) {
    if (mask.rows() != grid.rows() || mask.cols() != grid.cols()) {
        throw ConfigError("mask is " + std::to_string(mask.rows()) + "x" + std::to_string(mask.cols()) +
                          " but grid is " + std::to_string(grid.rows()) + "x" +
                          std::to_string(grid.cols()));
    }
    PrunedTokenSet set;
    set.patch_size = grid.patch_size();
    set.grid_rows = grid.rows();
    set.grid_cols = grid.cols();
    set.image_width = grid.original_width();
    set.image_height = grid.original_height();
    set.strategy = IndexStrategy::preserved;
    set.tokens.reserve(mask.count_ones());
    for (std::size_t r = 0; r < grid.rows(); ++r) {
        for (std::size_t c = 0; c < grid.cols(); ++c) {
            if (!mask.at(r, c)) {
                continue;
            }
            Token token;
            token.row = r;
            token.col = c;
            token.assigned_index = grid.index_of(r, c);
            token.pixels.resize(grid.patch_size() * grid.patch_size());
            grid.copy_pixels(r, c, token.pixels);
            set.tokens.push_back(std::move(token));
        }
    }
    return set;
}

PrunedTokenSet reindex(const PrunedTokenSet& set, IndexStrategy strategy, std::uint64_t seed) {
    if (set.strategy != IndexStrategy::preserved) {
        throw StateError("reindex requires a preserved set, got '" + std::string(to_string(set.strategy)) +
                         "'");
    }
    PrunedTokenSet out = set;
    out.strategy = strategy;
    switch (strategy) {
        case IndexStrategy::preserved:
            break;
        case IndexStrategy::ordered:
            for (std::size_t i = 0; i < out.tokens.size(); ++i) out.tokens[i].assigned_index = i;
            break;
        case IndexStrategy::constant:
            for (Token& t : out.tokens) t.assigned_index = 0;
            break;
        case IndexStrategy::random: {
            Rng rng(seed);
            const auto draws = sample_without_replacement(set.grid_size(), set.size(), rng);
            for (std::size_t i = 0; i < out.tokens.size(); ++i) out.tokens[i].assigned_index = draws[i];
            break;
        }
    }
    return out;
}

double token_reduction(const PrunedTokenSet& set) {
    if (set.grid_size() == 0) {
        throw DegenerateDataError("token reduction over an empty grid");
    }
    return 100.0 * (1.0 - static_cast<double>(set.size()) / static_cast<double>(set.grid_size()));
}

}  // namespace prunedoc
