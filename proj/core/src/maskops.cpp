#include "prunedoc/maskops.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "prunedoc/errors.hpp"

namespace prunedoc {

BinaryMask::BinaryMask(std::size_t rows, std::size_t cols, std::uint8_t fill)
    : rows_(rows), cols_(cols), bits_(rows * cols, fill ? 1 : 0) {}

BinaryMask::BinaryMask(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> bits)
    : rows_(rows), cols_(cols), bits_(std::move(bits)) {
    if (bits_.size() != rows * cols) {
        throw MalformedInputError("mask has " + std::to_string(bits_.size()) + " bits, expected " +
                                  std::to_string(rows * cols));
    }
    if (std::any_of(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b > 1; })) {
        throw MalformedInputError("mask bits must be 0 or 1");
    }
}

std::size_t BinaryMask::count_ones() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

BinaryMask threshold_logits(const LogitMap& logits) {
    std::vector<std::uint8_t> bits(logits.values.size());
    std::transform(logits.values.begin(), logits.values.end(), bits.begin(),
                   [](double z) { return static_cast<std::uint8_t>(z > 0.0 ? 1 : 0); });
    return BinaryMask(logits.rows, logits.cols, std::move(bits));
}

BinaryMask dilate(const BinaryMask& mask, std::size_t k) {
    if (k == 0 || k % 2 == 0) {
        throw ConfigError("pooling window must be odd and positive, got " + std::to_string(k));
    }
    if (k == 1 || mask.size() == 0) {
        return mask;
    }
    const std::size_t radius = k / 2;
    const std::size_t rows = mask.rows();
    const std::size_t cols = mask.cols();

    // The square window is separable: horizontal max, then vertical max.
    std::vector<std::uint8_t> horizontal(rows * cols, 0);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const std::size_t lo = c > radius ? c - radius : 0;
            const std::size_t hi = std::min(cols - 1, c + radius);
            std::uint8_t value = 0;
            for (std::size_t x = lo; x <= hi && value == 0; ++x) {
                value = mask.at(r, x) ? 1 : 0;
            }
            horizontal[r * cols + c] = value;
        }
    }
    std::vector<std::uint8_t> out(rows * cols, 0);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t lo = r > radius ? r - radius : 0;
        const std::size_t hi = std::min(rows - 1, r + radius);
        for (std::size_t c = 0; c < cols; ++c) {
            std::uint8_t value = 0;
            for (std::size_t y = lo; y <= hi && value == 0; ++y) {
                value = horizontal[y * cols + c];
            }
            out[r * cols + c] = value;
        }
    }
    return BinaryMask(rows, cols, std::move(out));
}

double coverage_ratio(const BinaryMask& mask) {
    if (mask.size() == 0) {
        throw DegenerateDataError("coverage of an empty mask is undefined");
    }
    return static_cast<double>(mask.count_ones()) / static_cast<double>(mask.size());
}

std::string format_mask(const BinaryMask& mask) {
    std::string out = std::to_string(mask.rows()) + " " + std::to_string(mask.cols()) + "\n";
    for (std::size_t r = 0; r < mask.rows(); ++r) {
        for (std::size_t c = 0; c < mask.cols(); ++c) {
            out.push_back(mask.at(r, c) ? '1' : '0');
        }
        out.push_back('\n');
    }
    return out;
}

BinaryMask parse_mask(const std::string& text) {
    std::istringstream in(text);
    std::size_t rows = 0;
    std::size_t cols = 0;
    if (!(in >> rows >> cols)) {
        throw MalformedInputError("mask text lacks a 'rows cols' header");
    }
    std::vector<std::uint8_t> bits;
    bits.reserve(rows * cols);
    std::string line;
    std::getline(in, line);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!std::getline(in, line) || line.size() != cols) {
            throw MalformedInputError("mask row " + std::to_string(r) + " has the wrong length");
        }
        for (const char ch : line) {
            if (ch != '0' && ch != '1') {
                throw MalformedInputError("mask rows may only contain '0' and '1'");
            }
            bits.push_back(ch == '1' ? 1 : 0);
        }
    }
    return BinaryMask(rows, cols, std::move(bits));
}

void write_mask(const BinaryMask& mask, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write mask '" + path.string() + "'");
    }
    out << format_mask(mask);
}

BinaryMask read_mask(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open mask '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_mask(buffer.str());
}

}  // namespace prunedoc
