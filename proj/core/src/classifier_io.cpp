#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>

#include "prunedoc/classifier.hpp"
#include "prunedoc/errors.hpp"

namespace prunedoc {

namespace {

constexpr std::string_view kModelMagic = "PDCLS1";

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t value) {
    for (int shift = 0; shift < 32; shift += 8) {
        out.push_back(static_cast<std::uint8_t>(value >> shift));
    }
}

void put_f32(std::vector<std::uint8_t>& out, float value) {
    put_u32(out, std::bit_cast<std::uint32_t>(value));
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t value = 0;
        for (int i = 0; i < 4; ++i) {
            value |= static_cast<std::uint32_t>(bytes_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
        }
        pos_ += 4;
        return value;
    }

    float f32() { return std::bit_cast<float>(u32()); }

    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) {
            throw ParseError(ParseFailure::truncated, "model file ends early");
        }
    }

    [[nodiscard]] std::size_t remaining() const { return bytes_.size() - pos_; }
    void skip(std::size_t n) { pos_ += n; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_model(const ClassifierModel& model) {
    if (model.w1.size() != model.hidden_dim * model.input_dim() || model.b1.size() != model.hidden_dim ||
        model.w2.size() != model.hidden_dim) {
        throw ShapeError("classifier parameters do not match declared shape");
    }
    std::vector<std::uint8_t> out(kModelMagic.begin(), kModelMagic.end());
    out.reserve(kModelMagic.size() + 8 + 4 * model.stored_parameter_count());
    put_u32(out, static_cast<std::uint32_t>(model.patch_size));
    put_u32(out, static_cast<std::uint32_t>(model.hidden_dim));
    for (const float w : model.w1) put_f32(out, w);
    for (const float b : model.b1) put_f32(out, b);
    for (const float w : model.w2) put_f32(out, w);
    put_f32(out, model.b2);
    return out;
}

ClassifierModel deserialize_model(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kModelMagic.size() ||
        std::memcmp(bytes.data(), kModelMagic.data(), kModelMagic.size()) != 0) {
        throw ParseError(ParseFailure::bad_magic, "not a PDCLS1 model file");
    }
    Reader in(bytes);
    in.skip(kModelMagic.size());
    const std::size_t patch_size = in.u32();
    const std::size_t hidden = in.u32();
    if (patch_size == 0 || hidden == 0) {
        throw ParseError(ParseFailure::invariant_violation, "zero patch size or hidden dimension");
    }
    const std::size_t expected = param_count(patch_size, hidden);
    if (in.remaining() / 4 < expected) {
        throw ParseError(ParseFailure::truncated, "model file ends early");
    }
    if (in.remaining() != 4 * expected) {
        throw ParseError(ParseFailure::malformed, "trailing bytes after model parameters");
    }
    ClassifierModel model = ClassifierModel::zeros(patch_size, hidden);
    for (float& w : model.w1) w = in.f32();
    for (float& b : model.b1) b = in.f32();
    for (float& w : model.w2) w = in.f32();
    model.b2 = in.f32();
    auto finite = [](float v) { return std::isfinite(v); };
    if (!std::all_of(model.w1.begin(), model.w1.end(), finite) ||
        !std::all_of(model.b1.begin(), model.b1.end(), finite) ||
        !std::all_of(model.w2.begin(), model.w2.end(), finite) || !std::isfinite(model.b2)) {
        throw ParseError(ParseFailure::invariant_violation, "non-finite classifier parameter");
    }
    return model;
}

void save_model(const ClassifierModel& model, const std::filesystem::path& path) {
    const auto bytes = serialize_model(model);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write model file '" + path.string() + "'");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("write failed for '" + path.string() + "'");
    }
}

ClassifierModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open model file '" + path.string() + "'");
    }
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                          std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

}  // namespace prunedoc
