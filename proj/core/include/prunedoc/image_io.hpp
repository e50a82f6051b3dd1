#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "prunedoc/imagegrid.hpp"

namespace prunedoc {

/// Binary PGM (P5, maxval 255).
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const GrayImage& img, const std::filesystem::path& path);

/// Any 8-bit (or 16-bit, stripped) gray / gray+alpha / RGB / RGBA / palette
/// PNG. Color is collapsed with to_grayscale; alpha is dropped.
GrayImage read_png(const std::filesystem::path& path);
void write_png(const GrayImage& img, const std::filesystem::path& path);

struct RgbImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> data;  // interleaved RGB
};
void write_png(const RgbImage& img, const std::filesystem::path& path);

/// Dispatches on file signature (PNG or P5), not on extension.
GrayImage read_image(const std::filesystem::path& path);
/// Dispatches on extension: ".pgm" writes PGM, anything else PNG.
void write_image(const GrayImage& img, const std::filesystem::path& path);

}  // namespace prunedoc
