#pragma once

#include <cstddef>
#include <vector>

namespace prunedoc {

/// Dense rows x cols map over a patch grid, row-major.
template <typename T>
struct GridMap {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<T> values;

    GridMap() = default;
    GridMap(std::size_t r, std::size_t c, T fill = T{}) : rows(r), cols(c), values(r * c, fill) {}

    [[nodiscard]] T& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    [[nodiscard]] const T& at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }

    friend bool operator==(const GridMap&, const GridMap&) = default;
};

/// Per-patch classifier logits.
using LogitMap = GridMap<double>;

}  // namespace prunedoc
