#include <gtest/gtest.h>

#include <png.h>

#include <fstream>

#include "prunedoc/errors.hpp"
#include "prunedoc/image_io.hpp"
#include "test_support.hpp"

namespace prunedoc {
namespace {

using testing::TempDir;

void write_raw_png(const std::filesystem::path& path, std::size_t w, std::size_t h, png_uint_32 format,
                   const std::vector<std::uint8_t>& data) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(w);
    image.height = static_cast<png_uint_32>(h);
    image.format = format;
    ASSERT_NE(png_image_write_to_file(&image, path.c_str(), 0, data.data(), 0, nullptr), 0);
}

TEST(ImageIo, PgmRoundTrip) {
    TempDir dir("pgm");
    Rng rng(1);
    const GrayImage img = testing::random_image(13, 7, rng);
    write_pgm(img, dir / "a.pgm");
    EXPECT_EQ(read_pgm(dir / "a.pgm"), img);
    EXPECT_EQ(read_image(dir / "a.pgm"), img);
}

TEST(ImageIo, PgmHeaderLayout) {
    TempDir dir("pgmhdr");
    write_pgm(GrayImage(2, 1, std::vector<std::uint8_t>{0, 255}), dir / "b.pgm");
    const auto bytes = testing::read_bytes(dir / "b.pgm");
    const std::string text(bytes.begin(), bytes.end());
    EXPECT_EQ(text, std::string("P5\n2 1\n255\n") + std::string("\x00\xff", 2));
}

TEST(ImageIo, PgmWithCommentsParses) {
    TempDir dir("pgmc");
    std::ofstream(dir / "c.pgm", std::ios::binary) << "P5\n# comment\n2 2\n255\n" << std::string("\x01\x02\x03\x04", 4);
    const GrayImage img = read_pgm(dir / "c.pgm");
    EXPECT_EQ(img.at(1, 1), 4);
}

TEST(ImageIo, TruncatedPgmIsMalformed) {
    TempDir dir("pgmt");
    std::ofstream(dir / "t.pgm", std::ios::binary) << "P5\n4 4\n255\n" << "abc";
    EXPECT_THROW(read_pgm(dir / "t.pgm"), MalformedInputError);
}

TEST(ImageIo, PngGrayRoundTrip) {
    TempDir dir("png");
    Rng rng(2);
    const GrayImage img = testing::random_image(31, 17, rng);
    write_png(img, dir / "a.png");
    EXPECT_EQ(read_png(dir / "a.png"), img);
    EXPECT_EQ(read_image(dir / "a.png"), img);
}

TEST(ImageIo, PngColorIsCollapsedAndAlphaDropped) {
    TempDir dir("pngrgb");
    write_raw_png(dir / "rgb.png", 2, 1, PNG_FORMAT_RGB, {255, 0, 0, 0, 0, 255});
    write_raw_png(dir / "rgba.png", 2, 1, PNG_FORMAT_RGBA, {255, 0, 0, 0, 0, 0, 255, 255});
    const GrayImage rgb = read_png(dir / "rgb.png");
    EXPECT_EQ(rgb.at(0, 0), 76);
    EXPECT_EQ(rgb.at(1, 0), 29);
    const GrayImage rgba = read_png(dir / "rgba.png");
    EXPECT_EQ(rgba.at(0, 0), 76);
    EXPECT_EQ(rgba.at(1, 0), 29);
}

TEST(ImageIo, MissingFileIsIoError) {
    EXPECT_THROW(read_image("/nonexistent/prunedoc.png"), IoError);
}

TEST(ImageIo, UnknownSignatureIsMalformed) {
    TempDir dir("sig");
    std::ofstream(dir / "x.png", std::ios::binary) << "GIF89a....";
    EXPECT_THROW(read_image(dir / "x.png"), MalformedInputError);
}

}  // namespace
}  // namespace prunedoc
