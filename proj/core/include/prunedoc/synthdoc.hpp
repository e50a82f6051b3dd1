#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "prunedoc/imagegrid.hpp"
#include "prunedoc/labeler.hpp"

namespace prunedoc {

enum class SynthMode { page, receipt };

std::string_view to_string(SynthMode mode) noexcept;
std::optional<SynthMode> parse_synth_mode(std::string_view name) noexcept;

/// Layout and rendering parameters for a synthetic document. Glyphs are
/// abstract vertical-stroke blobs; each word yields one ground-truth box.
struct SynthSpec {
    SynthMode mode = SynthMode::page;
    std::size_t width = 2481;
    std::size_t height = 3507;
    std::size_t margin = 200;
    std::size_t line_height = 50;
    std::size_t glyph_height = 32;
    std::size_t glyph_width_min = 14;
    std::size_t glyph_width_max = 26;
    std::size_t word_len_min = 1;
    std::size_t word_len_max = 9;
    std::size_t word_gap = 22;
    std::size_t line_gap = 24;
    double noise_sigma = 6.0;
    std::uint8_t ink_min = 10;
    std::uint8_t ink_max = 90;
    double fill_ratio = 0.85;

    /// A4 at 300 DPI with ~32 px glyphs.
    static SynthSpec page_default();
    /// Narrow receipt: short item/price lines and long blank runs.
    static SynthSpec receipt_default();

    /// Throws ConfigError on any invariant violation.
    void validate() const;

    [[nodiscard]] std::size_t line_pitch() const noexcept { return line_height + line_gap; }
    /// Horizontal spacing between glyphs inside a word.
    [[nodiscard]] std::size_t glyph_spacing() const noexcept;

    friend bool operator==(const SynthSpec&, const SynthSpec&) = default;
};

struct SynthDocument {
    GrayImage image;
    AnnotationSet annotations;
};

/// Deterministic in (spec, seed). image_id is left empty for the caller.
SynthDocument generate(const SynthSpec& spec, std::uint64_t seed);

std::string format_spec(const SynthSpec& spec);
/// Unspecified keys keep the defaults of the mode named by "mode".
SynthSpec parse_spec(const std::string& json_text);

}  // namespace prunedoc
