#include "prunedoc/image_io.hpp"

#include <png.h>

#include <array>
#include <cctype>
#include <fstream>
#include <string>

#include "prunedoc/errors.hpp"

namespace prunedoc {

namespace {

std::string describe(const std::filesystem::path& path) { return "'" + path.string() + "'"; }

// PGM header tokens may be separated by arbitrary whitespace and '#' comments.
std::string next_token(std::istream& in) {
    std::string token;
    int ch = in.get();
    while (ch != EOF) {
        if (ch == '#') {
            while (ch != EOF && ch != '\n') ch = in.get();
        } else if (std::isspace(ch)) {
            if (!token.empty()) break;
        } else {
            token.push_back(static_cast<char>(ch));
        }
        ch = in.get();
    }
    return token;
}

std::size_t parse_header_number(std::istream& in, const std::filesystem::path& path) {
    const std::string token = next_token(in);
    if (token.empty() || token.find_first_not_of("0123456789") != std::string::npos) {
        throw MalformedInputError("bad PGM header in " + describe(path));
    }
    return std::stoul(token);
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + describe(path));
    }
    if (next_token(in) != "P5") {
        throw MalformedInputError(describe(path) + " is not a binary PGM (P5)");
    }
    const std::size_t width = parse_header_number(in, path);
    const std::size_t height = parse_header_number(in, path);
    const std::size_t maxval = parse_header_number(in, path);
    if (maxval != 255) {
        throw MalformedInputError("only 8-bit PGM is supported, got maxval " +
                                  std::to_string(maxval));
    }
    std::vector<std::uint8_t> data(width * height);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (static_cast<std::size_t>(in.gcount()) != data.size()) {
        throw MalformedInputError("truncated PGM raster in " + describe(path));
    }
    return GrayImage(width, height, std::move(data));
}

void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + describe(path));
    }
    out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data().data()),
              static_cast<std::streamsize>(img.data().size()));
    if (!out) {
        throw IoError("write failed for " + describe(path));
    }
}

GrayImage read_png(const std::filesystem::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str())) {
        const std::string message = image.message;
        png_image_free(&image);
        throw MalformedInputError("cannot decode PNG " + describe(path) + ": " + message);
    }
    image.format = PNG_FORMAT_RGBA;
    std::vector<std::uint8_t> rgba(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, rgba.data(), 0, nullptr)) {
        const std::string message = image.message;
        png_image_free(&image);
        throw MalformedInputError("cannot decode PNG " + describe(path) + ": " + message);
    }
    const std::size_t width = image.width;
    const std::size_t height = image.height;
    std::vector<std::uint8_t> rgb(width * height * 3);
    for (std::size_t i = 0; i < width * height; ++i) {
        rgb[3 * i] = rgba[4 * i];
        rgb[3 * i + 1] = rgba[4 * i + 1];
        rgb[3 * i + 2] = rgba[4 * i + 2];
    }
    return to_grayscale(RgbView{width, height, rgb});
}

namespace {

void write_png_raw(std::size_t width, std::size_t height, png_uint_32 format,
                   const std::uint8_t* data, const std::filesystem::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(width);
    image.height = static_cast<png_uint_32>(height);
    image.format = format;
    if (!png_image_write_to_file(&image, path.c_str(), 0, data, 0, nullptr)) {
        const std::string message = image.message;
        png_image_free(&image);
        throw IoError("cannot write PNG " + describe(path) + ": " + message);
    }
}

}  // namespace

void write_png(const GrayImage& img, const std::filesystem::path& path) {
    write_png_raw(img.width(), img.height(), PNG_FORMAT_GRAY, img.data().data(), path);
}

void write_png(const RgbImage& img, const std::filesystem::path& path) {
    if (img.data.size() != img.width * img.height * 3) {
        throw MalformedInputError("RGB image buffer does not match its dimensions");
    }
    write_png_raw(img.width, img.height, PNG_FORMAT_RGB, img.data.data(), path);
}

GrayImage read_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + describe(path));
    }
    std::array<char, 8> signature{};
    in.read(signature.data(), signature.size());
    const auto got = static_cast<std::size_t>(in.gcount());
    in.close();
    if (got == 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(signature.data()), 0, 8) == 0) {
        return read_png(path);
    }
    if (got >= 2 && signature[0] == 'P' && signature[1] == '5') {
        return read_pgm(path);
    }
    throw MalformedInputError(describe(path) + " is neither PNG nor binary PGM");
}

void write_image(const GrayImage& img, const std::filesystem::path& path) {
    if (path.extension() == ".pgm") {
        write_pgm(img, path);
    } else {
        write_png(img, path);
    }
}

}  // namespace prunedoc
