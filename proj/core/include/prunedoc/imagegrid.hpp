#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace prunedoc {

inline constexpr std::uint8_t kBackgroundIntensity = 255;

/// 8-bit grayscale raster, row-major. Immutable once constructed.
class GrayImage {
public:
    GrayImage(std::size_t width, std::size_t height, std::uint8_t fill = kBackgroundIntensity);
    /// Throws MalformedInputError unless data.size() == width * height.
    GrayImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> data);

    [[nodiscard]] std::size_t width() const noexcept { return width_; }
    [[nodiscard]] std::size_t height() const noexcept { return height_; }
    [[nodiscard]] std::span<const std::uint8_t> data() const noexcept { return data_; }
    [[nodiscard]] std::uint8_t at(std::size_t x, std::size_t y) const noexcept {
        return data_[y * width_ + x];
    }
    [[nodiscard]] std::span<const std::uint8_t> row(std::size_t y) const noexcept {
        return std::span<const std::uint8_t>(data_).subspan(y * width_, width_);
    }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    std::size_t width_;
    std::size_t height_;
    std::vector<std::uint8_t> data_;
};

/// Interleaved 8-bit RGB raster, the input of to_grayscale.
struct RgbView {
    std::size_t width = 0;
    std::size_t height = 0;
    std::span<const std::uint8_t> data;
};

/// BT.601 luma, rounded half away from zero.
GrayImage to_grayscale(const RgbView& rgb);

/// Pads right and bottom with white so both dimensions are multiples of
/// patch_size. Aligned images are returned unchanged.
GrayImage pad_to_multiple(const GrayImage& img, std::size_t patch_size);

struct Patch {
    std::size_t row = 0;
    std::size_t col = 0;
    std::size_t index = 0;
    std::vector<std::uint8_t> pixels;  // patch_size^2, row-major
};

/// Non-overlapping P x P lattice over a padded image. Patch (r, c) has linear
/// raster index r * cols + c.
class PatchGrid {
public:
    [[nodiscard]] std::size_t patch_size() const noexcept { return patch_size_; }
    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t size() const noexcept { return rows_ * cols_; }
    [[nodiscard]] const GrayImage& source() const noexcept { return source_; }
    [[nodiscard]] std::uint8_t pad_value() const noexcept { return kBackgroundIntensity; }
    /// Dimensions of the image before padding.
    [[nodiscard]] std::size_t original_width() const noexcept { return original_width_; }
    [[nodiscard]] std::size_t original_height() const noexcept { return original_height_; }

    [[nodiscard]] std::size_t index_of(std::size_t row, std::size_t col) const noexcept {
        return row * cols_ + col;
    }

    /// Copies patch pixels into `out` (size P^2) without allocating a Patch.
    void copy_pixels(std::size_t row, std::size_t col, std::span<std::uint8_t> out) const;

    friend PatchGrid extract_grid(const GrayImage& img, std::size_t patch_size);

private:
    PatchGrid(GrayImage padded, std::size_t patch_size, std::size_t original_width,
              std::size_t original_height);

    GrayImage source_;
    std::size_t patch_size_;
    std::size_t rows_;
    std::size_t cols_;
    std::size_t original_width_;
    std::size_t original_height_;
};

PatchGrid extract_grid(const GrayImage& img, std::size_t patch_size);

/// Throws BoundsError when (row, col) is outside the grid.
Patch patch_at(const PatchGrid& grid, std::size_t row, std::size_t col);

}  // namespace prunedoc
