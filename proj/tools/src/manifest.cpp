#include "manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

#include <json.hpp>

#include "vibgate/errors.hpp"
#include "vibgate/hashing.hpp"

#ifndef VIBGATE_VERSION
#define VIBGATE_VERSION "0.0.0"
#endif

namespace vibgate::cli {
namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string tool_version() { return VIBGATE_VERSION; }

RunManifest::RunManifest(std::string command) : command_(std::move(command)), started_(utc_now()) {}

void RunManifest::add_file(const std::filesystem::path& dir, const std::filesystem::path& name) {
  const auto full = dir / name;
  files_.push_back({name.generic_string(), sha256_file(full), std::filesystem::file_size(full)});
}

void RunManifest::write(const std::filesystem::path& dir) {
  nlohmann::json j;
  j["command"] = command_;
  j["tool_version"] = tool_version();
  j["config_hash"] = config_hash_;
  j["system_hash"] = system_hash_;
  j["eigenstate_cache_hash"] = cache_hash_;
  j["status"] = status_;
  j["started"] = started_;
  j["finished"] = utc_now();
  nlohmann::json files = nlohmann::json::array();
  for (const auto& f : files_)
    files.push_back({{"path", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  j["files"] = files;
  std::ofstream out(dir / "manifest.json");
  out << j.dump(2) << '\n';
  if (!out) throw Error("cannot write manifest in " + dir.string());
}

OutputLock::OutputLock(const std::filesystem::path& dir) : path_(dir / ".lock") {
  std::filesystem::create_directories(dir);
  std::FILE* f = std::fopen(path_.c_str(), "wx");
  if (!f) {
    path_.clear();
    throw Error("output directory " + dir.string() + " is locked by another run");
  }
  std::fclose(f);
}

OutputLock::~OutputLock() {
  if (!path_.empty()) {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
}

}  // namespace vibgate::cli
