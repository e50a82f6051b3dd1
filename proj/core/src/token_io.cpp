#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "prunedoc/errors.hpp"
#include "prunedoc/pruner.hpp"

namespace prunedoc {

namespace {

using Json = nlohmann::ordered_json;

std::size_t unsigned_field(const Json& obj, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_number_unsigned()) {
        throw ParseError(ParseFailure::malformed, std::string("missing or non-integer field '") + key + "'");
    }
    return it->get<std::size_t>();
}

std::string string_field(const Json& obj, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) {
        throw ParseError(ParseFailure::malformed, std::string("missing or non-string field '") + key + "'");
    }
    return it->get<std::string>();
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spill(const std::filesystem::path& path, const char* data, std::size_t size) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write '" + path.string() + "'");
    }
    out.write(data, static_cast<std::streamsize>(size));
    if (!out) {
        throw IoError("write failed for '" + path.string() + "'");
    }
}

}  // namespace

TokenPayload serialize(const PrunedTokenSet& set, const std::string& pixels_file) {
    set.validate();
    Json manifest;
    manifest["version"] = kTokenFormatVersion;
    manifest["patch_size"] = set.patch_size;
    manifest["grid_rows"] = set.grid_rows;
    manifest["grid_cols"] = set.grid_cols;
    manifest["image_width"] = set.image_width;
    manifest["image_height"] = set.image_height;
    manifest["strategy"] = std::string(to_string(set.strategy));
    manifest["pixels_file"] = pixels_file;
    Json tokens = Json::array();
    for (const Token& t : set.tokens) {
        tokens.push_back(Json{{"i", t.assigned_index}, {"r", t.row}, {"c", t.col}});
    }
    manifest["tokens"] = std::move(tokens);

    TokenPayload payload;
    payload.manifest = manifest.dump(1) + "\n";
    payload.blob.assign(kTokenPixelMagic.begin(), kTokenPixelMagic.end());
    payload.blob.reserve(kTokenPixelMagic.size() + set.size() * set.patch_size * set.patch_size);
    for (const Token& t : set.tokens) {
        payload.blob.insert(payload.blob.end(), t.pixels.begin(), t.pixels.end());
    }
    return payload;
}

PrunedTokenSet deserialize(const TokenPayload& payload) {
    Json manifest;
    try {
        manifest = Json::parse(payload.manifest);
    } catch (const Json::parse_error& e) {
        throw ParseError(ParseFailure::malformed, std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!manifest.is_object()) {
        throw ParseError(ParseFailure::malformed, "manifest must be a JSON object");
    }
    const auto version = manifest.find("version");
    if (version == manifest.end() || !version->is_number_integer() ||
        version->get<long long>() != kTokenFormatVersion) {
        throw ParseError(ParseFailure::version_mismatch,
                         "expected PTOK version " + std::to_string(kTokenFormatVersion));
    }

    PrunedTokenSet set;
    set.patch_size = unsigned_field(manifest, "patch_size");
    set.grid_rows = unsigned_field(manifest, "grid_rows");
    set.grid_cols = unsigned_field(manifest, "grid_cols");
    set.image_width = unsigned_field(manifest, "image_width");
    set.image_height = unsigned_field(manifest, "image_height");
    const std::string strategy = string_field(manifest, "strategy");
    const auto parsed = parse_strategy(strategy);
    if (!parsed) {
        throw ParseError(ParseFailure::malformed, "unknown strategy '" + strategy + "'");
    }
    set.strategy = *parsed;
    string_field(manifest, "pixels_file");

    const auto tokens = manifest.find("tokens");
    if (tokens == manifest.end() || !tokens->is_array()) {
        throw ParseError(ParseFailure::malformed, "missing token array");
    }

    const auto& blob = payload.blob;
    const std::size_t head = std::min(blob.size(), kTokenPixelMagic.size());
    if (std::memcmp(blob.data(), kTokenPixelMagic.data(), head) != 0) {
        throw ParseError(ParseFailure::bad_magic, "pixel blob does not start with PTOKPX1");
    }
    if (blob.size() < kTokenPixelMagic.size()) {
        throw ParseError(ParseFailure::truncated, "pixel blob shorter than its magic");
    }
    const std::size_t patch_pixels = set.patch_size * set.patch_size;
    const std::size_t expected = kTokenPixelMagic.size() + tokens->size() * patch_pixels;
    if (blob.size() < expected) {
        throw ParseError(ParseFailure::truncated, "pixel blob holds fewer tokens than the manifest");
    }
    if (blob.size() > expected) {
        throw ParseError(ParseFailure::malformed, "pixel blob has trailing bytes");
    }

    set.tokens.reserve(tokens->size());
    auto cursor = blob.begin() + static_cast<std::ptrdiff_t>(kTokenPixelMagic.size());
    for (const Json& entry : *tokens) {
        if (!entry.is_object()) {
            throw ParseError(ParseFailure::malformed, "token entries must be objects");
        }
        Token t;
        t.assigned_index = unsigned_field(entry, "i");
        t.row = unsigned_field(entry, "r");
        t.col = unsigned_field(entry, "c");
        t.pixels.assign(cursor, cursor + static_cast<std::ptrdiff_t>(patch_pixels));
        cursor += static_cast<std::ptrdiff_t>(patch_pixels);
        set.tokens.push_back(std::move(t));
    }
    set.validate();
    return set;
}

TokenFiles token_paths(const std::filesystem::path& stem) {
    return {std::filesystem::path(stem.string() + ".ptok.json"),
            std::filesystem::path(stem.string() + ".ptok.bin")};
}

TokenFiles write_tokens(const PrunedTokenSet& set, const std::filesystem::path& stem) {
    const TokenFiles files = token_paths(stem);
    const TokenPayload payload = serialize(set, files.blob.filename().string());
    spill(files.manifest, payload.manifest.data(), payload.manifest.size());
    spill(files.blob, reinterpret_cast<const char*>(payload.blob.data()), payload.blob.size());
    return files;
}

PrunedTokenSet read_tokens(const std::filesystem::path& manifest_path) {
    const auto manifest_bytes = slurp(manifest_path);
    TokenPayload payload;
    payload.manifest.assign(manifest_bytes.begin(), manifest_bytes.end());

    Json manifest;
    try {
        manifest = Json::parse(payload.manifest);
    } catch (const Json::parse_error& e) {
        throw ParseError(ParseFailure::malformed, std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!manifest.is_object()) {
        throw ParseError(ParseFailure::malformed, "manifest must be a JSON object");
    }
    const std::string pixels_file = string_field(manifest, "pixels_file");
    payload.blob = slurp(manifest_path.parent_path() / pixels_file);
    return deserialize(payload);
}

}  // namespace prunedoc
