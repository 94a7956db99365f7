#pragma once

// Line-oriented `key = value` files. Values are scalars or bracketed,
// comma-separated arrays; `#` starts a comment.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace resetloop {

struct KeyValueEntry {
  std::string key;
  std::string scalar;               // raw scalar text (unused for arrays)
  std::vector<std::string> items;   // array elements
  bool is_array = false;
  int line = 0;
};

class KeyValueFile {
 public:
  static KeyValueFile parse(std::istream& in, std::string_view source = "<stream>");
  static KeyValueFile load(const std::filesystem::path& path);

  const std::string& source() const { return source_; }
  const std::vector<KeyValueEntry>& entries() const { return entries_; }
  bool has(std::string_view key) const { return find(key) != nullptr; }

  std::optional<std::string> get_string(std::string_view key) const;
  std::optional<double> get_double(std::string_view key) const;
  std::optional<int> get_int(std::string_view key) const;
  std::optional<bool> get_bool(std::string_view key) const;
  std::optional<std::vector<double>> get_doubles(std::string_view key) const;

  /// Throws InputError naming the first key not in `allowed`.
  void require_known(std::initializer_list<std::string_view> allowed) const;

 private:
  const KeyValueEntry* find(std::string_view key) const;
  [[noreturn]] void fail(const KeyValueEntry& e, const std::string& message) const;

  std::string source_;
  std::vector<KeyValueEntry> entries_;
};

/// Shortest decimal text that parses back to the same double.
std::string format_shortest(double value);
std::string format_array(const std::vector<double>& values);

}  // namespace resetloop
