#include "resetloop/frf_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "resetloop/errors.hpp"
#include "resetloop/units.hpp"

namespace resetloop {
namespace {

std::string strip(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string remove_spaces(std::string_view s) {
  std::string out;
  for (char c : s)
    if (c != ' ' && c != '\t' && c != '\r') out.push_back(c);
  return out;
}

double parse_field(const std::string& text, std::string_view source, int line) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    std::ostringstream msg;
    msg << source << ":" << line << ": malformed number '" << text << "'";
    throw InputError(msg.str());
  }
  return value;
}

}  // namespace

std::string format_exact(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

FrequencyResponse parse_frf(std::istream& in, std::string_view source) {
  FrequencyResponse fr;
  std::string raw;
  int line = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line;
    const std::string text = strip(raw);
    if (text.empty() || text.front() == '#') continue;
    if (!header_seen && remove_spaces(text) == "freq_hz,real,imag") {
      header_seen = true;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream row(text);
    std::string field;
    while (std::getline(row, field, ',')) fields.push_back(strip(field));
    if (fields.size() != 3) {
      std::ostringstream msg;
      msg << source << ":" << line << ": expected 3 fields (freq_hz,real,imag), got " << fields.size();
      throw InputError(msg.str());
    }
    const double f = parse_field(fields[0], source, line);
    const double re = parse_field(fields[1], source, line);
    const double im = parse_field(fields[2], source, line);
    if (!(f > 0.0)) {
      std::ostringstream msg;
      msg << source << ":" << line << ": frequency must be positive";
      throw InputError(msg.str());
    }
    const double w = hz_to_rad(f);
    if (!fr.omega.empty() && !(w > fr.omega.back())) {
      std::ostringstream msg;
      msg << source << ":" << line << ": frequencies must be strictly increasing";
      throw InputError(msg.str());
    }
    fr.omega.push_back(w);
    fr.values.emplace_back(re, im);
    fr.singular.push_back(false);
  }
  if (fr.omega.empty()) throw InputError(std::string(source) + ": no FRF samples");
  return fr;
}

FrequencyResponse load_frf(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open FRF file " + path.string());
  return parse_frf(in, path.string());
}

void write_frf(std::ostream& out, const FrequencyResponse& fr) {
  out << "freq_hz,real,imag\n";
  for (std::size_t i = 0; i < fr.size(); ++i)
    out << format_exact(rad_to_hz(fr.omega[i])) << ',' << format_exact(fr.values[i].real()) << ','
        << format_exact(fr.values[i].imag()) << '\n';
}

void save_frf(const std::filesystem::path& path, const FrequencyResponse& fr) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write FRF file " + path.string());
  write_frf(out, fr);
}

void write_bode_csv(std::ostream& out, const FrequencyResponse& fr) {
  const auto phase = unwrap_phase_deg(fr.values);
  out << "freq_hz,mag_db,phase_deg\n";
  char buffer[96];
  for (std::size_t i = 0; i < fr.size(); ++i) {
    if (!fr.singular.empty() && fr.singular[i]) continue;
    std::snprintf(buffer, sizeof buffer, "%.10g,%.10g,%.10g\n", rad_to_hz(fr.omega[i]),
                  to_db(std::abs(fr.values[i])), phase[i]);
    out << buffer;
  }
}

}  // namespace resetloop
