#include "prunedoc/imagegrid.hpp"

#include <algorithm>
#include <string>

#include "prunedoc/errors.hpp"

namespace prunedoc {

namespace {

void require_positive_patch(std::size_t patch_size) {
    if (patch_size == 0) {
        throw ConfigError("patch size must be at least 1");
    }
}

std::size_t round_up(std::size_t value, std::size_t multiple) {
    return (value + multiple - 1) / multiple * multiple;
}

}  // namespace

GrayImage::GrayImage(std::size_t width, std::size_t height, std::uint8_t fill)
    : width_(width), height_(height) {
    if (width == 0 || height == 0) {
        throw MalformedInputError("image dimensions must be positive");
    }
    data_.assign(width * height, fill);
}

GrayImage::GrayImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
    if (width == 0 || height == 0) {
        throw MalformedInputError("image dimensions must be positive");
    }
    if (data_.size() != width * height) {
        throw MalformedInputError("gray raster has " + std::to_string(data_.size()) +
                                  " bytes, expected " + std::to_string(width * height));
    }
}

GrayImage to_grayscale(const RgbView& rgb) {
    if (rgb.width == 0 || rgb.height == 0) {
        throw MalformedInputError("RGB raster dimensions must be positive");
    }
    const std::size_t pixels = rgb.width * rgb.height;
    if (rgb.data.size() != 3 * pixels) {
        throw MalformedInputError("RGB raster has " + std::to_string(rgb.data.size()) +
                                  " bytes, expected " + std::to_string(3 * pixels));
    }
    std::vector<std::uint8_t> gray(pixels);
    for (std::size_t i = 0; i < pixels; ++i) {
        const unsigned r = rgb.data[3 * i];
        const unsigned g = rgb.data[3 * i + 1];
        const unsigned b = rgb.data[3 * i + 2];
        // Fixed point in thousandths; +500 rounds half up. Max is exactly 255.
        const unsigned luma = (299 * r + 587 * g + 114 * b + 500) / 1000;
        gray[i] = static_cast<std::uint8_t>(std::min(luma, 255u));
    }
    return GrayImage(rgb.width, rgb.height, std::move(gray));
}

GrayImage pad_to_multiple(const GrayImage& img, std::size_t patch_size) {
    require_positive_patch(patch_size);
    const std::size_t width = round_up(img.width(), patch_size);
    const std::size_t height = round_up(img.height(), patch_size);
    if (width == img.width() && height == img.height()) {
        return img;
    }
    std::vector<std::uint8_t> out(width * height, kBackgroundIntensity);
    for (std::size_t y = 0; y < img.height(); ++y) {
        const auto src = img.row(y);
        std::copy(src.begin(), src.end(), out.begin() + static_cast<std::ptrdiff_t>(y * width));
    }
    return GrayImage(width, height, std::move(out));
}

PatchGrid::PatchGrid(GrayImage padded, std::size_t patch_size, std::size_t original_width,
                     std::size_t original_height)
    : source_(std::move(padded)),
      patch_size_(patch_size),
      rows_(source_.height() / patch_size),
      cols_(source_.width() / patch_size),
      original_width_(original_width),
      original_height_(original_height) {}

void PatchGrid::copy_pixels(std::size_t row, std::size_t col, std::span<std::uint8_t> out) const {
    const std::size_t p = patch_size_;
    for (std::size_t y = 0; y < p; ++y) {
        const auto line = source_.row(row * p + y).subspan(col * p, p);
        std::copy(line.begin(), line.end(), out.begin() + static_cast<std::ptrdiff_t>(y * p));
    }
}

PatchGrid extract_grid(const GrayImage& img, std::size_t patch_size) {
    return PatchGrid(pad_to_multiple(img, patch_size), patch_size, img.width(), img.height());
}

Patch patch_at(const PatchGrid& grid, std::size_t row, std::size_t col) {
    if (row >= grid.rows() || col >= grid.cols()) {
        throw BoundsError("patch (" + std::to_string(row) + "," + std::to_string(col) +
                          ") outside " + std::to_string(grid.rows()) + "x" +
                          std::to_string(grid.cols()) + " grid");
    }
    Patch patch;
    patch.row = row;
    patch.col = col;
    patch.index = grid.index_of(row, col);
    patch.pixels.resize(grid.patch_size() * grid.patch_size());
    grid.copy_pixels(row, col, patch.pixels);
    return patch;
}

}  // namespace prunedoc
