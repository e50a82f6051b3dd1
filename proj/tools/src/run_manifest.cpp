#include "run_manifest.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "prunedoc/errors.hpp"

namespace prunedoc::cli {

std::string sha256_hex(const std::string& text) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    std::ostringstream hex;
    for (unsigned int i = 0; i < length; ++i) {
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    }
    return hex.str();
}

std::string RunManifest::config_hash() const {
    Json canonical;
    canonical["command"] = command;
    canonical["options"] = options;
    return sha256_hex(canonical.dump());
}

Json RunManifest::to_json(bool with_timestamp) const {
    Json doc;
    doc["command"] = command;
    doc["config_hash"] = config_hash();
    doc["seed"] = seed;
    doc["options"] = options;
    doc["inputs"] = inputs;
    doc["outputs"] = outputs;
    doc["metrics"] = metrics;
    if (with_timestamp) {
        const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm utc{};
        gmtime_r(&now, &utc);
        std::ostringstream stamp;
        stamp << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
        doc["timestamp"] = stamp.str();
    }
    return doc;
}

void RunManifest::write(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write run manifest '" + path.string() + "'");
    }
    out << to_json().dump(2) << "\n";
}

}  // namespace prunedoc::cli
