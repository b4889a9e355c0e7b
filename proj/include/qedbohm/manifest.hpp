#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace qedbohm {

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);
std::string file_sha256(const std::filesystem::path& path);

struct ManifestEntry {
  std::string name;  // relative to the run directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string config_hash;
  std::string code_version;
  std::uint64_t seed = 0;
  std::vector<ManifestEntry> files;
  std::vector<std::pair<std::string, double>> timings;  // stage, seconds
};

inline constexpr const char* kManifestName = "manifest.json";

/// Digests every listed file in `dir` and writes manifest.json there.
RunManifest write_manifest(const std::filesystem::path& dir, const std::vector<std::string>& files,
                           const std::string& config_hash, std::uint64_t seed,
                           const std::vector<std::pair<std::string, double>>& timings);

RunManifest read_manifest(const std::filesystem::path& dir);

/// Names of listed files whose current digest differs from the manifest (missing files included).
std::vector<std::string> verify_manifest(const std::filesystem::path& dir);

const char* code_version();

}  // namespace qedbohm
