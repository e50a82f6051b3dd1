#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "prunedoc/grid_map.hpp"

namespace prunedoc {

/// Per-patch foreground decision. Bits are 0 or 1, row-major.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(std::size_t rows, std::size_t cols, std::uint8_t fill = 0);
    /// Throws MalformedInputError on length mismatch or a bit outside {0,1}.
    BinaryMask(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> bits);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t size() const noexcept { return bits_.size(); }
    [[nodiscard]] bool at(std::size_t r, std::size_t c) const noexcept { return bits_[r * cols_ + c] != 0; }
    void set(std::size_t r, std::size_t c, bool value) noexcept {
        bits_[r * cols_ + c] = value ? 1 : 0;
    }
    [[nodiscard]] const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }
    [[nodiscard]] std::size_t count_ones() const noexcept;

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::uint8_t> bits_;
};

/// bit = 1 iff logit > 0 (strict).
BinaryMask threshold_logits(const LogitMap& logits);

/// k x k stride-1 max filter with zero padding (binary dilation with a square
/// structuring element). Output has the input's dimensions. k must be odd.
BinaryMask dilate(const BinaryMask& mask, std::size_t k);

/// Fraction of ones. Throws DegenerateDataError on an empty mask.
double coverage_ratio(const BinaryMask& mask);

/// Text form: "rows cols" then one line of '0'/'1' per row.
std::string format_mask(const BinaryMask& mask);
BinaryMask parse_mask(const std::string& text);
void write_mask(const BinaryMask& mask, const std::filesystem::path& path);
BinaryMask read_mask(const std::filesystem::path& path);

}  // namespace prunedoc
