#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace smartq::cli {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);
std::string iso8601_utc(std::chrono::system_clock::time_point t);

// Record of one command invocation and the files it produced. Everything
// except the timestamps is reproducible from the same inputs.
struct RunManifest {
  std::string command;
  nlohmann::ordered_json config;
  std::uint64_t base_seed = 0;
  std::string engine;
  std::chrono::system_clock::time_point started_at;
  std::chrono::system_clock::time_point finished_at;
  std::vector<std::filesystem::path> outputs;  // relative to the manifest's directory

  nlohmann::ordered_json to_json(const std::filesystem::path& dir) const;
  void write(const std::filesystem::path& path) const;
};

}  // namespace smartq::cli
