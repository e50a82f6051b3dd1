#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace prunedoc::cli {

using Json = nlohmann::ordered_json;

/// One record per CLI invocation. The hash covers command and options only,
/// so two runs with the same flags hash identically regardless of time.
struct RunManifest {
    std::string command;
    Json options = Json::object();
    std::uint64_t seed = 0;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    Json metrics = Json::object();

    [[nodiscard]] std::string config_hash() const;
    [[nodiscard]] Json to_json(bool with_timestamp = true) const;
    void write(const std::filesystem::path& path) const;
};

/// Hex SHA-256 of `text`.
std::string sha256_hex(const std::string& text);

}  // namespace prunedoc::cli
