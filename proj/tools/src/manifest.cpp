#include "smartq_cli/manifest.hpp"

#include <openssl/evp.h>

#include <ctime>
#include <fstream>
#include <iterator>
#include <stdexcept>

#ifndef SMARTQ_VERSION
#define SMARTQ_VERSION "unknown"
#endif

namespace smartq::cli {

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

std::string iso8601_utc(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::ordered_json RunManifest::to_json(const std::filesystem::path& dir) const {
  nlohmann::ordered_json j;
  j["tool"] = "smartq";
  j["version"] = SMARTQ_VERSION;
  j["command"] = command;
  j["base_seed"] = base_seed;
  j["engine"] = engine;
  j["config"] = config;
  j["started_at"] = iso8601_utc(started_at);
  j["finished_at"] = iso8601_utc(finished_at);
  auto files = nlohmann::ordered_json::array();
  for (const auto& rel : outputs) {
    const auto full = dir / rel;
    files.push_back({{"path", rel.generic_string()},
                     {"bytes", std::filesystem::file_size(full)},
                     {"sha256", sha256_file(full)}});
  }
  j["outputs"] = std::move(files);
  return j;
}

void RunManifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << to_json(path.parent_path()).dump(2) << '\n';
}

}  // namespace smartq::cli
