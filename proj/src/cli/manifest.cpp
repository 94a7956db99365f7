#include "resetloop/cli/manifest.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "resetloop/errors.hpp"

namespace resetloop::cli {

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1)
    throw NumericalError("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw InputError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw InputError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw InputError("cannot move '" + tmp.string() + "' into place: " + ec.message());
}

RunManifest::RunManifest(std::string command, std::filesystem::path output_dir, std::uint64_t seed)
    : command_(std::move(command)), output_dir_(std::move(output_dir)), seed_(seed) {
  std::error_code ec;
  std::filesystem::create_directories(output_dir_, ec);
  if (ec) throw InputError("cannot create output directory '" + output_dir_.string() + "': " + ec.message());
}

void RunManifest::add_input(const std::filesystem::path& path) {
  std::lock_guard lock(mutex_);
  inputs_.push_back(path.string());
}

void RunManifest::write(const std::string& relative, std::string_view content) {
  write_file_atomic(output_dir_ / relative, content);
  ManifestEntry entry{relative, sha256_hex(content), content.size()};
  std::lock_guard lock(mutex_);
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const ManifestEntry& e) { return e.path == relative; });
  if (it != entries_.end()) *it = std::move(entry);
  else entries_.push_back(std::move(entry));
}

std::vector<ManifestEntry> RunManifest::entries() const {
  std::lock_guard lock(mutex_);
  std::vector<ManifestEntry> out = entries_;
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
  return out;
}

void RunManifest::finish(bool complete) {
  nlohmann::ordered_json doc;
  doc["command"] = command_;
  doc["tool_version"] = kToolVersion;
  doc["output_dir"] = output_dir_.string();
  doc["seed"] = seed_;
  doc["complete"] = complete;
  doc["inputs"] = inputs_;
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const auto& e : entries()) files.push_back({{"path", e.path}, {"sha256", e.sha256}, {"bytes", e.bytes}});
  doc["files"] = std::move(files);
  write_file_atomic(output_dir_ / "manifest.json", doc.dump(2) + "\n");
}

}  // namespace resetloop::cli
