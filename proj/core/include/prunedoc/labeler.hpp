#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "prunedoc/classifier.hpp"
#include "prunedoc/grid_map.hpp"
#include "prunedoc/imagegrid.hpp"

namespace prunedoc {

/// Half-open pixel rectangle [x0, x1) x [y0, y1).
struct TextBox {
    std::size_t x0 = 0;
    std::size_t y0 = 0;
    std::size_t x1 = 0;
    std::size_t y1 = 0;

    [[nodiscard]] std::size_t width() const noexcept { return x1 - x0; }
    [[nodiscard]] std::size_t height() const noexcept { return y1 - y0; }

    friend bool operator==(const TextBox&, const TextBox&) = default;
};

/// Throws MalformedInputError unless x1 > x0 and y1 > y0.
TextBox make_box(std::size_t x0, std::size_t y0, std::size_t x1, std::size_t y1);

struct AnnotationSet {
    std::string image_id;
    std::vector<TextBox> boxes;

    friend bool operator==(const AnnotationSet&, const AnnotationSet&) = default;
};

using LabelMap = GridMap<std::uint8_t>;

/// A patch is text (1) when its rectangle shares positive area with any box.
/// Boxes are clipped to the padded image; fully clipped boxes are ignored.
LabelMap label_patches(const PatchGrid& grid, const std::vector<TextBox>& boxes);

struct LabeledImage {
    GrayImage image;
    AnnotationSet annotations;
};

/// Labels every patch of every image, then keeps a seeded random subset of
/// min(cap, class size) patches per class. Output order: the sampled
/// foreground patches followed by the sampled background patches, each
/// group in corpus order. Throws DegenerateDataError if a class is absent.
PatchDataset build_dataset(const std::vector<LabeledImage>& corpus, std::size_t patch_size,
                           std::size_t per_class_cap, std::uint64_t seed);

/// JSON: {"image": "name.png", "boxes": [[x0,y0,x1,y1], ...]}.
std::string format_annotations(const AnnotationSet& annotations);
AnnotationSet parse_annotations(const std::string& text);
void write_annotations(const AnnotationSet& annotations, const std::filesystem::path& path);
AnnotationSet read_annotations(const std::filesystem::path& path);

}  // namespace prunedoc
