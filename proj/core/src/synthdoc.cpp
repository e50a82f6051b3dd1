#include "prunedoc/synthdoc.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <json.hpp>

#include "prunedoc/errors.hpp"
#include "prunedoc/rng.hpp"

namespace prunedoc {

std::string_view to_string(SynthMode mode) noexcept {
    return mode == SynthMode::page ? "page" : "receipt";
}

std::optional<SynthMode> parse_synth_mode(std::string_view name) noexcept {
    if (name == "page") return SynthMode::page;
    if (name == "receipt") return SynthMode::receipt;
    return std::nullopt;
}

SynthSpec SynthSpec::page_default() { return SynthSpec{}; }

SynthSpec SynthSpec::receipt_default() {
    SynthSpec spec;
    spec.mode = SynthMode::receipt;
    spec.width = 900;
    spec.height = 2600;
    spec.margin = 60;
    spec.line_height = 50;
    spec.glyph_height = 32;
    spec.glyph_width_min = 14;
    spec.glyph_width_max = 24;
    spec.word_len_min = 2;
    spec.word_len_max = 8;
    spec.word_gap = 20;
    spec.line_gap = 16;
    spec.fill_ratio = 0.6;
    return spec;
}

void SynthSpec::validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("synth spec: " + what); };
    if (width == 0 || height == 0 || line_height == 0 || glyph_height == 0) {
        fail("dimensions must be positive");
    }
    if (2 * margin >= std::min(width, height)) fail("margins leave no printable area");
    if (glyph_height > line_height) fail("glyph_height exceeds line_height");
    if (glyph_width_min == 0 || glyph_width_min > glyph_width_max) fail("bad glyph width range");
    if (word_len_min == 0 || word_len_min > word_len_max) fail("bad word length range");
    if (ink_min > ink_max) fail("bad ink intensity range");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) fail("noise_sigma must be >= 0");
    if (!(fill_ratio >= 0.0 && fill_ratio <= 1.0)) fail("fill_ratio must lie in [0, 1]");
}

std::size_t SynthSpec::glyph_spacing() const noexcept {
    return std::max<std::size_t>(2, glyph_width_min / 4);
}

namespace {

class Canvas {
public:
    Canvas(std::size_t width, std::size_t height) : width_(width), pixels_(width * height, 255) {}

    void fill(std::size_t x0, std::size_t y0, std::size_t x1, std::size_t y1, std::uint8_t value) {
        for (std::size_t y = y0; y < y1; ++y) {
            std::fill_n(pixels_.begin() + static_cast<std::ptrdiff_t>(y * width_ + x0), x1 - x0, value);
        }
    }

    std::vector<std::uint8_t>& pixels() { return pixels_; }

private:
    std::size_t width_;
    std::vector<std::uint8_t> pixels_;
};

struct Layout {
    const SynthSpec& spec;
    Canvas& canvas;
    AnnotationSet& annotations;
    Rng& rng;

    std::size_t draw_uniform(std::size_t lo, std::size_t hi) {
        return static_cast<std::size_t>(rng.between(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
    }

    std::vector<std::size_t> plan_word() {
        std::vector<std::size_t> widths(draw_uniform(spec.word_len_min, spec.word_len_max));
        for (auto& w : widths) w = draw_uniform(spec.glyph_width_min, spec.glyph_width_max);
        return widths;
    }

    std::size_t word_width(const std::vector<std::size_t>& glyphs) const {
        std::size_t total = 0;
        for (const auto w : glyphs) total += w;
        return total + (glyphs.size() - 1) * spec.glyph_spacing();
    }

    // Strokes span the full glyph height, so the word's ink extent is exactly
    // [x, x + width) x [top, top + glyph_height).
    void draw_glyph(std::size_t x, std::size_t top, std::size_t w) {
        const auto ink = static_cast<std::uint8_t>(draw_uniform(spec.ink_min, spec.ink_max));
        const std::size_t bottom = top + spec.glyph_height;
        const std::size_t stroke = std::min(w, std::max<std::size_t>(2, w / 5));
        const std::size_t strokes = 1 + w / 8;
        for (std::size_t s = 0; s < strokes; ++s) {
            const std::size_t sx = strokes == 1 ? x + (w - stroke) / 2 : x + s * (w - stroke) / (strokes - 1);
            canvas.fill(sx, top, sx + stroke, bottom, ink);
        }
        if (strokes == 1) {
            // A lone stroke would not reach the glyph's left/right extent.
            canvas.fill(x, top, x + w, top + std::min(stroke, spec.glyph_height), ink);
            canvas.fill(x, bottom - std::min(stroke, spec.glyph_height), x + w, bottom, ink);
        } else if (rng.uniform() < 0.5) {
            const std::size_t bar = std::min(stroke, spec.glyph_height);
            const std::size_t by = top + draw_uniform(0, spec.glyph_height - bar);
            canvas.fill(x, by, x + w, by + bar, ink);
        }
    }

    void draw_word(std::size_t x, std::size_t top, const std::vector<std::size_t>& glyphs) {
        std::size_t cursor = x;
        for (const auto w : glyphs) {
            draw_glyph(cursor, top, w);
            cursor += w + spec.glyph_spacing();
        }
        annotations.boxes.push_back(make_box(x, top, x + word_width(glyphs), top + spec.glyph_height));
    }

    void page_line(std::size_t top) {
        std::size_t x = spec.margin;
        const std::size_t right = spec.width - spec.margin;
        while (true) {
            const auto glyphs = plan_word();
            const std::size_t w = word_width(glyphs);
            if (x + w > right) break;
            draw_word(x, top, glyphs);
            x += w + spec.word_gap;
        }
    }

    void receipt_line(std::size_t top) {
        std::size_t x = spec.margin;
        const std::size_t right = spec.width - spec.margin;
        const std::size_t item_words = draw_uniform(1, 3);
        for (std::size_t i = 0; i < item_words; ++i) {
            const auto glyphs = plan_word();
            const std::size_t w = word_width(glyphs);
            if (x + w > right) break;
            draw_word(x, top, glyphs);
            x += w + spec.word_gap;
        }
        if (rng.uniform() < 0.7) {
            const auto price = plan_word();
            const std::size_t w = word_width(price);
            if (w <= right - spec.margin && right - w >= x) {
                draw_word(right - w, top, price);
            }
        }
    }

    void run() {
        const std::size_t pitch = spec.line_pitch();
        const std::size_t bottom_limit = spec.height - spec.margin;
        const std::size_t glyph_offset = (spec.line_height - spec.glyph_height) / 2;
        std::size_t skip = 0;
        for (std::size_t y = spec.margin; y + spec.line_height <= bottom_limit; y += pitch) {
            if (skip > 0) {
                --skip;
                continue;
            }
            if (!(rng.uniform() < spec.fill_ratio)) continue;
            if (spec.mode == SynthMode::page) {
                page_line(y + glyph_offset);
            } else {
                receipt_line(y + glyph_offset);
                if (rng.uniform() < 0.15) skip = draw_uniform(2, 5);
            }
        }
    }
};

}  // namespace

SynthDocument generate(const SynthSpec& spec, std::uint64_t seed) {
    spec.validate();
    Canvas canvas(spec.width, spec.height);
    AnnotationSet annotations;
    Rng layout_rng(mix_seed(seed, 0));
    Layout{spec, canvas, annotations, layout_rng}.run();

    auto& pixels = canvas.pixels();
    if (spec.noise_sigma > 0.0) {
        Rng noise_rng(mix_seed(seed, 1));
        for (auto& px : pixels) {
            const double v = std::round(static_cast<double>(px) + spec.noise_sigma * noise_rng.gaussian());
            px = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
        }
    }
    return SynthDocument{GrayImage(spec.width, spec.height, std::move(pixels)), std::move(annotations)};
}

std::string format_spec(const SynthSpec& spec) {
    nlohmann::ordered_json doc;
    doc["mode"] = std::string(to_string(spec.mode));
    doc["width"] = spec.width;
    doc["height"] = spec.height;
    doc["margin"] = spec.margin;
    doc["line_height"] = spec.line_height;
    doc["glyph_height"] = spec.glyph_height;
    doc["glyph_width_range"] = {spec.glyph_width_min, spec.glyph_width_max};
    doc["word_len_range"] = {spec.word_len_min, spec.word_len_max};
    doc["word_gap"] = spec.word_gap;
    doc["line_gap"] = spec.line_gap;
    doc["noise_sigma"] = spec.noise_sigma;
    doc["ink_intensity_range"] = {spec.ink_min, spec.ink_max};
    doc["fill_ratio"] = spec.fill_ratio;
    return doc.dump(2) + "\n";
}

SynthSpec parse_spec(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("synth spec is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ConfigError("synth spec must be a JSON object");
    }
    SynthSpec spec = SynthSpec::page_default();
    if (doc.contains("mode")) {
        const auto mode = parse_synth_mode(doc["mode"].get<std::string>());
        if (!mode) throw ConfigError("synth spec: unknown mode");
        spec = *mode == SynthMode::page ? SynthSpec::page_default() : SynthSpec::receipt_default();
    }
    try {
        auto read = [&](const char* key, auto& field) {
            if (doc.contains(key)) field = doc[key].get<std::remove_reference_t<decltype(field)>>();
        };
        auto read_pair = [&](const char* key, auto& lo, auto& hi) {
            if (!doc.contains(key)) return;
            const auto& range = doc[key];
            if (!range.is_array() || range.size() != 2) {
                throw ConfigError(std::string("synth spec: '") + key + "' must be [min, max]");
            }
            lo = range[0].get<std::remove_reference_t<decltype(lo)>>();
            hi = range[1].get<std::remove_reference_t<decltype(hi)>>();
        };
        read("width", spec.width);
        read("height", spec.height);
        read("margin", spec.margin);
        read("line_height", spec.line_height);
        read("glyph_height", spec.glyph_height);
        read_pair("glyph_width_range", spec.glyph_width_min, spec.glyph_width_max);
        read_pair("word_len_range", spec.word_len_min, spec.word_len_max);
        read("word_gap", spec.word_gap);
        read("line_gap", spec.line_gap);
        read("noise_sigma", spec.noise_sigma);
        read_pair("ink_intensity_range", spec.ink_min, spec.ink_max);
        read("fill_ratio", spec.fill_ratio);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("synth spec has a field of the wrong type: ") + e.what());
    }
    spec.validate();
    return spec;
}

}  // namespace prunedoc
