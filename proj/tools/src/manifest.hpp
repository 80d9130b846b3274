#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace vibgate::cli {

/// Record of one command run. Written as manifest.json next to the outputs.
class RunManifest {
 public:
  explicit RunManifest(std::string command);

  void set_config_hash(std::string h) { config_hash_ = std::move(h); }
  void set_system_hash(std::string h) { system_hash_ = std::move(h); }
  void set_cache_hash(std::string h) { cache_hash_ = std::move(h); }
  void set_status(std::string s) { status_ = std::move(s); }

  /// Checksums a produced file; the inventory stores paths relative to dir.
  void add_file(const std::filesystem::path& dir, const std::filesystem::path& name);
  void write(const std::filesystem::path& dir);

 private:
  struct Entry {
    std::string name;
    std::string sha256;
    std::uintmax_t bytes;
  };
  std::string command_;
  std::string started_;
  std::string config_hash_, system_hash_, cache_hash_;
  std::string status_ = "ok";
  std::vector<Entry> files_;
};

/// Exclusive lock file inside an output directory, released on destruction.
class OutputLock {
 public:
  /// Creates the directory if needed. Throws Error when another run holds it.
  explicit OutputLock(const std::filesystem::path& dir);
  ~OutputLock();
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  std::filesystem::path path_;
};

std::string tool_version();

}  // namespace vibgate::cli
