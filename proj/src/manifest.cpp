#include "qedbohm/manifest.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

#ifndef QEDBOHM_VERSION
#define QEDBOHM_VERSION "unknown"
#endif

namespace qedbohm {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

const char* code_version() { return QEDBOHM_VERSION; }

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

std::string file_sha256(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

RunManifest write_manifest(const std::filesystem::path& dir, const std::vector<std::string>& files,
                           const std::string& config_hash, std::uint64_t seed,
                           const std::vector<std::pair<std::string, double>>& timings) {
  RunManifest m;
  m.config_hash = config_hash;
  m.code_version = code_version();
  m.seed = seed;
  m.timings = timings;
  nlohmann::ordered_json j;
  j["config_hash"] = config_hash;
  j["code_version"] = m.code_version;
  j["seed"] = seed;
  j["files"] = nlohmann::ordered_json::array();
  for (const auto& name : files) {
    const auto path = dir / name;
    ManifestEntry e{name, file_sha256(path), std::filesystem::file_size(path)};
    j["files"].push_back({{"name", e.name}, {"sha256", e.sha256}, {"bytes", e.bytes}});
    m.files.push_back(std::move(e));
  }
  j["timings_seconds"] = nlohmann::ordered_json::object();
  for (const auto& [stage, sec] : timings) j["timings_seconds"][stage] = sec;
  std::ofstream out(dir / kManifestName);
  if (!out) throw std::runtime_error("cannot write " + (dir / kManifestName).string());
  out << j.dump(2) << '\n';
  return m;
}

RunManifest read_manifest(const std::filesystem::path& dir) {
  const auto j = nlohmann::json::parse(read_file(dir / kManifestName));
  RunManifest m;
  m.config_hash = j.at("config_hash").get<std::string>();
  m.code_version = j.at("code_version").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& f : j.at("files")) {
    m.files.push_back({f.at("name").get<std::string>(), f.at("sha256").get<std::string>(),
                       f.at("bytes").get<std::uintmax_t>()});
  }
  for (const auto& [stage, sec] : j.at("timings_seconds").items()) m.timings.emplace_back(stage, sec.get<double>());
  return m;
}

std::vector<std::string> verify_manifest(const std::filesystem::path& dir) {
  std::vector<std::string> bad;
  for (const auto& e : read_manifest(dir).files) {
    const auto path = dir / e.name;
    if (!std::filesystem::exists(path) || file_sha256(path) != e.sha256) bad.push_back(e.name);
  }
  return bad;
}

}  // namespace qedbohm
