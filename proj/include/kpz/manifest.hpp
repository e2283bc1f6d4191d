#pragma once

// Run manifest: configuration fingerprint, per-command results and checks,
// and the SHA-256 of every file in the output directory. content_hash covers
// everything except wall-clock timing, so it is reproducible.

#include <string>

#include "json.hpp"

namespace kpz {

inline constexpr const char* kSoftwareVersion = "1.0.0";
inline constexpr const char* kManifestName = "manifest.json";

std::string sha256_hex(const std::string& data);
std::string sha256_file(const std::string& path);

/// Merges `section` under commands.<command>, re-lists the output files and
/// rewrites dir/manifest.json. A manifest from a different configuration
/// fingerprint is replaced rather than merged.
nlohmann::json update_manifest(const std::string& dir, const std::string& command,
                               const std::string& config_fingerprint, const nlohmann::json& section,
                               double seconds);

/// SHA-256 of the manifest without its timing and content_hash entries.
std::string manifest_content_hash(const nlohmann::json& manifest);

}  // namespace kpz
