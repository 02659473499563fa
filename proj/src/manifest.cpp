#include "kfp/manifest.hpp"

#include "kfp/common.hpp"

#include <Eigen/Core>
#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <memory>

namespace kfp {

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError("cannot open \"" + path + "\" for hashing");

    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                                EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
        throw FormatError("cannot initialize SHA-256");

    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        const std::streamsize got = in.gcount();
        if (got > 0 && EVP_DigestUpdate(ctx.get(), buf, static_cast<size_t>(got)) != 1)
            throw FormatError("SHA-256 update failed");
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
        throw FormatError("SHA-256 finalization failed");

    std::string hex(2 * len, '0');
    for (unsigned int i = 0; i < len; ++i)
        std::snprintf(hex.data() + 2 * i, 3, "%02x", digest[i]);
    return hex;
}

void write_manifest(const std::string& dir, const ManifestInfo& info) {
    nlohmann::json doc;
    doc["tool"] = "kfp";
    doc["version"] = kToolVersion;
    doc["command"] = info.command;
    doc["argv"] = info.argv;
    doc["seed"] = info.seed;
    doc["inputs"] = info.inputs;
    if (!info.config.is_null())
        doc["config"] = info.config;

    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    doc["generated"] = stamp;

    doc["libraries"] = {
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                      std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"openssl", OPENSSL_VERSION_TEXT},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
    };

    const std::string path = dir + "/manifest.json";
    std::ofstream out(path);
    if (!out)
        throw FormatError("cannot write \"" + path + "\"");
    out << doc.dump(2) << "\n";
}

} // namespace kfp
