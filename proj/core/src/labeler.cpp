#include "prunedoc/labeler.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "prunedoc/errors.hpp"
#include "prunedoc/rng.hpp"

namespace prunedoc {

TextBox make_box(std::size_t x0, std::size_t y0, std::size_t x1, std::size_t y1) {
    if (x1 <= x0 || y1 <= y0) {
        throw MalformedInputError("text box must have positive width and height");
    }
    return TextBox{x0, y0, x1, y1};
}

LabelMap label_patches(const PatchGrid& grid, const std::vector<TextBox>& boxes) {
    LabelMap labels(grid.rows(), grid.cols(), 0);
    const std::size_t p = grid.patch_size();
    const std::size_t width = grid.source().width();
    const std::size_t height = grid.source().height();
    for (const TextBox& box : boxes) {
        const std::size_t x1 = std::min(box.x1, width);
        const std::size_t y1 = std::min(box.y1, height);
        if (box.x0 >= x1 || box.y0 >= y1) {
            continue;
        }
        // Half-open: the last covered pixel is x1 - 1, so edge contact with
        // the next patch column contributes no area.
        for (std::size_t r = box.y0 / p; r <= (y1 - 1) / p; ++r) {
            for (std::size_t c = box.x0 / p; c <= (x1 - 1) / p; ++c) {
                labels.at(r, c) = 1;
            }
        }
    }
    return labels;
}

namespace {

struct PatchRef {
    std::size_t image = 0;
    std::size_t row = 0;
    std::size_t col = 0;
};

std::vector<PatchRef> sample(std::vector<PatchRef> refs, std::size_t cap, Rng& rng) {
    if (refs.size() <= cap) {
        return refs;
    }
    auto picked = sample_without_replacement(refs.size(), cap, rng);
    std::sort(picked.begin(), picked.end());
    std::vector<PatchRef> out;
    out.reserve(cap);
    for (const std::size_t i : picked) out.push_back(refs[i]);
    return out;
}

}  // namespace

PatchDataset build_dataset(const std::vector<LabeledImage>& corpus, std::size_t patch_size,
                           std::size_t per_class_cap, std::uint64_t seed) {
    if (corpus.empty()) {
        throw DegenerateDataError("dataset corpus is empty");
    }
    if (per_class_cap == 0) {
        throw ConfigError("per-class cap must be at least 1");
    }
    if (patch_size == 0) {
        throw ConfigError("patch size must be at least 1");
    }

    std::vector<PatchGrid> grids;
    grids.reserve(corpus.size());
    std::vector<PatchRef> foreground;
    std::vector<PatchRef> background;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        grids.push_back(extract_grid(corpus[i].image, patch_size));
        const LabelMap labels = label_patches(grids.back(), corpus[i].annotations.boxes);
        for (std::size_t r = 0; r < labels.rows; ++r) {
            for (std::size_t c = 0; c < labels.cols; ++c) {
                (labels.at(r, c) ? foreground : background).push_back({i, r, c});
            }
        }
    }
    if (foreground.empty() || background.empty()) {
        throw DegenerateDataError(std::string("corpus has no ") +
                                  (foreground.empty() ? "foreground" : "background") + " patches");
    }

    Rng rng(seed);
    const auto fg = sample(std::move(foreground), per_class_cap, rng);
    const auto bg = sample(std::move(background), per_class_cap, rng);

    PatchDataset data(patch_size);
    std::vector<std::uint8_t> pixels(patch_size * patch_size);
    for (const auto& [refs, label] : {std::pair{&fg, std::uint8_t{1}}, std::pair{&bg, std::uint8_t{0}}}) {
        for (const PatchRef& ref : *refs) {
            grids[ref.image].copy_pixels(ref.row, ref.col, pixels);
            data.add(pixels, label);
        }
    }
    return data;
}

std::string format_annotations(const AnnotationSet& annotations) {
    nlohmann::ordered_json doc;
    doc["image"] = annotations.image_id;
    auto boxes = nlohmann::ordered_json::array();
    for (const TextBox& b : annotations.boxes) {
        boxes.push_back({b.x0, b.y0, b.x1, b.y1});
    }
    doc["boxes"] = std::move(boxes);
    return doc.dump() + "\n";
}

AnnotationSet parse_annotations(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedInputError(std::string("annotation file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("image") || !doc["image"].is_string() ||
        !doc.contains("boxes") || !doc["boxes"].is_array()) {
        throw MalformedInputError("annotation JSON needs 'image' and 'boxes'");
    }
    AnnotationSet out;
    out.image_id = doc["image"].get<std::string>();
    for (const auto& entry : doc["boxes"]) {
        if (!entry.is_array() || entry.size() != 4 ||
            !std::all_of(entry.begin(), entry.end(), [](const auto& v) { return v.is_number_unsigned(); })) {
            throw MalformedInputError("each box must be [x0, y0, x1, y1] with non-negative integers");
        }
        out.boxes.push_back(make_box(entry[0].get<std::size_t>(), entry[1].get<std::size_t>(),
                                     entry[2].get<std::size_t>(), entry[3].get<std::size_t>()));
    }
    return out;
}

void write_annotations(const AnnotationSet& annotations, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write annotations '" + path.string() + "'");
    }
    out << format_annotations(annotations);
}

AnnotationSet read_annotations(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open annotations '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_annotations(buffer.str());
}

}  // namespace prunedoc
