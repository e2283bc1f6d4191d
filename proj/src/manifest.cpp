#include "kpz/manifest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <vector>

#include "kpz/errors.hpp"
#include "kpz/report.hpp"

namespace kpz {

namespace fs = std::filesystem;

namespace {

std::string hex(const unsigned char* d, unsigned n) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    for (unsigned i = 0; i < n; ++i) {
        s += digits[d[i] >> 4];
        s += digits[d[i] & 15];
    }
    return s;
}

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new()) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) throw IoError("SHA-256 unavailable");
    }
    ~Sha256() { EVP_MD_CTX_free(ctx_); }
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    void update(const void* p, std::size_t n) { EVP_DigestUpdate(ctx_, p, n); }
    std::string hex_digest() {
        unsigned char d[EVP_MAX_MD_SIZE];
        unsigned n = 0;
        EVP_DigestFinal_ex(ctx_, d, &n);
        return hex(d, n);
    }

private:
    EVP_MD_CTX* ctx_;
};

}  // namespace

std::string sha256_hex(const std::string& data) {
    Sha256 h;
    h.update(data.data(), data.size());
    return h.hex_digest();
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    Sha256 h;
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    return h.hex_digest();
}

std::string manifest_content_hash(const nlohmann::json& manifest) {
    auto m = manifest;
    m.erase("timing");
    m.erase("content_hash");
    return sha256_hex(m.dump());
}

nlohmann::json update_manifest(const std::string& dir, const std::string& command,
                               const std::string& config_fingerprint, const nlohmann::json& section,
                               double seconds) {
    const auto path = (fs::path(dir) / kManifestName).string();
    nlohmann::json m;
    if (fs::exists(path)) {
        try {
            m = nlohmann::json::parse(read_text(path));
        } catch (const nlohmann::json::exception& e) {
            throw IoError(path + ": " + e.what());
        }
        if (m.value("config_fingerprint", "") != config_fingerprint) m = nlohmann::json::object();
    }
    m["software"] = {{"name", "kpzlab"}, {"version", kSoftwareVersion}};
    m["config_fingerprint"] = config_fingerprint;
    m["commands"][command] = section;
    m["timing"][command + "_seconds"] = seconds;

    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().filename() != kManifestName) names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    auto outputs = nlohmann::json::array();
    for (const auto& n : names) {
        const auto p = (fs::path(dir) / n).string();
        outputs.push_back({{"file", n}, {"bytes", fs::file_size(p)}, {"sha256", sha256_file(p)}});
    }
    m["outputs"] = outputs;
    m["content_hash"] = manifest_content_hash(m);
    write_text(path, m.dump(2) + "\n");
    return m;
}

}  // namespace kpz
