#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "prunedoc/errors.hpp"
#include "prunedoc/labeler.hpp"
#include "prunedoc/synthdoc.hpp"

namespace prunedoc {
namespace {

constexpr std::size_t kPatch = 28;
constexpr int kSeeds = 20;

double label_coverage(const SynthDocument& doc) {
    const PatchGrid grid = extract_grid(doc.image, kPatch);
    const LabelMap labels = label_patches(grid, doc.annotations.boxes);
    std::size_t ones = 0;
    for (auto v : labels.values) ones += v;
    return static_cast<double>(ones) / static_cast<double>(labels.values.size());
}

const std::vector<SynthDocument>& corpus(SynthMode mode) {
    static std::map<SynthMode, std::vector<SynthDocument>> cache;
    auto& docs = cache[mode];
    if (docs.empty()) {
        const SynthSpec spec = mode == SynthMode::page ? SynthSpec::page_default() : SynthSpec::receipt_default();
        for (int s = 0; s < kSeeds; ++s) docs.push_back(generate(spec, static_cast<std::uint64_t>(s)));
    }
    return docs;
}

// Expected fraction of patches touched by text on a full-width page, from the
// layout parameters alone: filled lines times the patch rows a glyph band
// straddles, times the patch columns a typical line spans.
double estimated_page_coverage(const SynthSpec& spec) {
    const double p = static_cast<double>(kPatch);
    const double rows = std::ceil(spec.height / p);
    const double cols = std::ceil(spec.width / p);
    const double slots = std::floor(static_cast<double>(spec.height - 2 * spec.margin - spec.line_height) /
                                    static_cast<double>(spec.line_pitch())) + 1.0;
    const double lines = spec.fill_ratio * slots;
    const double rows_per_line = (spec.glyph_height + p - 1.0) / p;

    const double glyph_w = (spec.glyph_width_min + spec.glyph_width_max) / 2.0;
    const double letters = (spec.word_len_min + spec.word_len_max) / 2.0;
    const double word_w = letters * glyph_w + (letters - 1.0) * static_cast<double>(spec.glyph_spacing());
    // A line stops at the first word that does not fit: on average half a
    // word plus a gap is left unused at the right margin.
    const double span = static_cast<double>(spec.width - 2 * spec.margin) - (word_w + spec.word_gap) / 2.0;
    const double cols_per_line = (span + p - 1.0) / p;
    return lines * rows_per_line * cols_per_line / (rows * cols);
}

TEST(Synth, SpecDefaultsValidate) {
    EXPECT_NO_THROW(SynthSpec::page_default().validate());
    EXPECT_NO_THROW(SynthSpec::receipt_default().validate());
    SynthSpec bad = SynthSpec::page_default();
    bad.glyph_height = bad.line_height + 1;
    EXPECT_THROW(bad.validate(), ConfigError);
    bad = SynthSpec::page_default();
    bad.margin = (bad.width + 1) / 2;
    EXPECT_THROW(bad.validate(), ConfigError);
    bad = SynthSpec::page_default();
    bad.fill_ratio = 1.5;
    EXPECT_THROW(generate(bad, 0), ConfigError);
}

TEST(Synth, ZeroFillGivesBlankPage) {
    SynthSpec spec = SynthSpec::page_default();
    spec.fill_ratio = 0.0;
    spec.noise_sigma = 0.0;
    const SynthDocument doc = generate(spec, 3);
    EXPECT_TRUE(doc.annotations.boxes.empty());
    for (auto v : doc.image.data()) ASSERT_EQ(v, 255);
}

TEST(Synth, DeterministicPerSeed) {
    SynthSpec spec = SynthSpec::page_default();
    spec.width = 700;
    spec.height = 900;
    spec.margin = 50;
    const SynthDocument a = generate(spec, 11);
    const SynthDocument b = generate(spec, 11);
    const SynthDocument c = generate(spec, 12);
    EXPECT_EQ(a.image, b.image);
    EXPECT_EQ(a.annotations, b.annotations);
    EXPECT_NE(a.image, c.image);
}

TEST(Synth, BoxHeightsMatchGlyphHeight) {
    for (const auto& doc : corpus(SynthMode::page)) {
        ASSERT_FALSE(doc.annotations.boxes.empty());
        for (const auto& b : doc.annotations.boxes) {
            EXPECT_GE(b.height(), 30u);
            EXPECT_LE(b.height(), 35u);
            EXPECT_LE(b.x1, doc.image.width());
            EXPECT_LE(b.y1, doc.image.height());
        }
    }
}

TEST(Synth, EveryInkPixelIsInsideABox) {
    for (SynthSpec spec : {SynthSpec::page_default(), SynthSpec::receipt_default()}) {
        spec.noise_sigma = 0.0;
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            const SynthDocument doc = generate(spec, seed);
            const std::size_t w = doc.image.width();
            std::vector<std::uint8_t> inside(w * doc.image.height(), 0);
            for (const auto& b : doc.annotations.boxes) {
                for (std::size_t y = b.y0; y < b.y1; ++y) {
                    for (std::size_t x = b.x0; x < b.x1; ++x) inside[y * w + x] = 1;
                }
            }
            std::size_t stray = 0;
            for (std::size_t i = 0; i < inside.size(); ++i) {
                if (doc.image.data()[i] < 128 && inside[i] == 0) ++stray;
            }
            EXPECT_EQ(stray, 0u) << to_string(spec.mode) << " seed " << seed;
        }
    }
}

TEST(Synth, PageCoverageNearAnalyticEstimate) {
    const double estimate = estimated_page_coverage(SynthSpec::page_default());
    double mean = 0.0;
    for (const auto& doc : corpus(SynthMode::page)) {
        const double coverage = label_coverage(doc);
        EXPECT_NEAR(coverage, estimate, 0.10);
        mean += coverage / kSeeds;
    }
    EXPECT_NEAR(mean, estimate, 0.10);
}

TEST(Synth, ReceiptsPruneMoreThanPages) {
    double page = 0.0;
    double receipt = 0.0;
    for (const auto& doc : corpus(SynthMode::page)) page += 100.0 * (1.0 - label_coverage(doc)) / kSeeds;
    for (const auto& doc : corpus(SynthMode::receipt)) receipt += 100.0 * (1.0 - label_coverage(doc)) / kSeeds;
    EXPECT_GT(receipt, page);
}

TEST(SynthSpecJson, RoundTripAndPartialOverrides) {
    const SynthSpec receipt = SynthSpec::receipt_default();
    EXPECT_EQ(parse_spec(format_spec(receipt)), receipt);
    const SynthSpec partial = parse_spec(R"({"mode":"receipt","fill_ratio":0.25,"glyph_width_range":[10,12]})");
    EXPECT_EQ(partial.width, receipt.width);
    EXPECT_DOUBLE_EQ(partial.fill_ratio, 0.25);
    EXPECT_EQ(partial.glyph_width_min, 10u);
    EXPECT_EQ(partial.glyph_width_max, 12u);
    EXPECT_THROW(parse_spec(R"({"mode":"poster"})"), ConfigError);
    EXPECT_THROW(parse_spec(R"({"word_len_range":[3]})"), ConfigError);
    EXPECT_THROW(parse_spec("nope"), ConfigError);
}

}  // namespace
}  // namespace prunedoc
