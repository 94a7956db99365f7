#include "resetloop/key_value.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>

#include "resetloop/errors.hpp"

namespace resetloop {
namespace {

std::string_view strip(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string location(std::string_view source, int line) {
  return std::string(source) + ":" + std::to_string(line) + ": ";
}

std::optional<double> parse_number(std::string_view text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (begin != end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

}  // namespace

KeyValueFile KeyValueFile::parse(std::istream& in, std::string_view source) {
  KeyValueFile out;
  out.source_ = std::string(source);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view text = raw;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = strip(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw InputError(location(source, line) + "expected 'key = value'");
    std::string_view key = strip(text.substr(0, eq));
    std::string_view value = strip(text.substr(eq + 1));
    if (key.size() > 2 && key.ends_with("[]")) key.remove_suffix(2);
    if (key.empty()) throw InputError(location(source, line) + "missing key");
    if (!std::all_of(key.begin(), key.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }))
      throw InputError(location(source, line) + "invalid key '" + std::string(key) + "'");
    if (out.find(key)) throw InputError(location(source, line) + "duplicate key '" + std::string(key) + "'");
    if (value.empty()) throw InputError(location(source, line) + "missing value for '" + std::string(key) + "'");

    KeyValueEntry entry;
    entry.key = std::string(key);
    entry.line = line;
    if (value.front() == '[') {
      if (value.back() != ']') throw InputError(location(source, line) + "unterminated array");
      entry.is_array = true;
      std::string_view body = strip(value.substr(1, value.size() - 2));
      while (!body.empty()) {
        const auto comma = body.find(',');
        const std::string_view item = strip(body.substr(0, comma));
        if (item.empty()) throw InputError(location(source, line) + "empty array element");
        entry.items.emplace_back(item);
        if (comma == std::string_view::npos) break;
        body = body.substr(comma + 1);
        if (strip(body).empty()) throw InputError(location(source, line) + "trailing comma in array");
      }
    } else {
      entry.scalar = std::string(value);
    }
    out.entries_.push_back(std::move(entry));
  }
  return out;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return parse(in, path.string());
}

const KeyValueEntry* KeyValueFile::find(std::string_view key) const {
  for (const auto& e : entries_)
    if (e.key == key) return &e;
  return nullptr;
}

void KeyValueFile::fail(const KeyValueEntry& e, const std::string& message) const {
  throw InputError(location(source_, e.line) + e.key + ": " + message);
}

std::optional<std::string> KeyValueFile::get_string(std::string_view key) const {
  const KeyValueEntry* e = find(key);
  if (!e) return std::nullopt;
  if (e->is_array) fail(*e, "expected a scalar");
  return e->scalar;
}

std::optional<double> KeyValueFile::get_double(std::string_view key) const {
  const KeyValueEntry* e = find(key);
  if (!e) return std::nullopt;
  if (e->is_array) fail(*e, "expected a number, found an array");
  const auto v = parse_number(e->scalar);
  if (!v) fail(*e, "invalid number '" + e->scalar + "'");
  return v;
}

std::optional<int> KeyValueFile::get_int(std::string_view key) const {
  const KeyValueEntry* e = find(key);
  if (!e) return std::nullopt;
  if (e->is_array) fail(*e, "expected an integer, found an array");
  long long value = 0;
  const char* begin = e->scalar.data();
  const char* end = begin + e->scalar.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || value < INT32_MIN || value > INT32_MAX)
    fail(*e, "invalid integer '" + e->scalar + "'");
  return static_cast<int>(value);
}

std::optional<bool> KeyValueFile::get_bool(std::string_view key) const {
  const KeyValueEntry* e = find(key);
  if (!e) return std::nullopt;
  if (e->is_array) fail(*e, "expected a boolean");
  const std::string& s = e->scalar;
  if (s == "true" || s == "on" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "off" || s == "no" || s == "0") return false;
  fail(*e, "invalid boolean '" + s + "'");
}

std::optional<std::vector<double>> KeyValueFile::get_doubles(std::string_view key) const {
  const KeyValueEntry* e = find(key);
  if (!e) return std::nullopt;
  if (!e->is_array) {
    const auto v = parse_number(e->scalar);
    if (!v) fail(*e, "expected an array");
    return std::vector<double>{*v};
  }
  std::vector<double> out;
  for (const auto& item : e->items) {
    const auto v = parse_number(item);
    if (!v) fail(*e, "invalid number '" + item + "'");
    out.push_back(*v);
  }
  return out;
}

void KeyValueFile::require_known(std::initializer_list<std::string_view> allowed) const {
  for (const auto& e : entries_)
    if (std::find(allowed.begin(), allowed.end(), e.key) == allowed.end()) fail(e, "unknown key");
}

std::string format_shortest(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  if (ec != std::errc()) throw NumericalError("cannot format number");
  return std::string(buffer, ptr);
}

std::string format_array(const std::vector<double>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += format_shortest(values[i]);
  }
  return out + "]";
}

}  // namespace resetloop
