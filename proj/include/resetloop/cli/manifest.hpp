#pragma once

// Output directories with a checksum manifest. Files are written to a
// temporary name and renamed into place.

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace resetloop::cli {

inline constexpr std::string_view kToolVersion = "1.0.0";

std::string sha256_hex(std::string_view data);

struct ManifestEntry {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::uint64_t bytes = 0;
};

class RunManifest {
 public:
  RunManifest(std::string command, std::filesystem::path output_dir, std::uint64_t seed = 0);

  void add_input(const std::filesystem::path& path);
  /// Writes `content` to output_dir/relative atomically and records it. Thread-safe.
  void write(const std::string& relative, std::string_view content);

  /// Writes manifest.json (entries sorted by path). `complete` is false for aborted runs.
  void finish(bool complete = true);

  const std::filesystem::path& output_dir() const { return output_dir_; }
  std::vector<ManifestEntry> entries() const;

 private:
  std::string command_;
  std::filesystem::path output_dir_;
  std::uint64_t seed_;
  std::vector<std::string> inputs_;
  mutable std::mutex mutex_;
  std::vector<ManifestEntry> entries_;
};

void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace resetloop::cli
