#pragma once

#include <json.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace kfp {

inline constexpr const char* kToolVersion = "0.1.0";

// SHA-256 of a file's contents, lowercase hex. Throws FormatError when the
// file cannot be read.
std::string sha256_file(const std::string& path);

struct ManifestInfo {
    std::string command;
    std::vector<std::string> argv;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> inputs; // path -> sha256
    nlohmann::json config;                     // command-specific knobs
};

// Writes <dir>/manifest.json describing one run: command line, input hashes,
// seed, configuration, library versions, timestamp.
void write_manifest(const std::string& dir, const ManifestInfo& info);

} // namespace kfp
