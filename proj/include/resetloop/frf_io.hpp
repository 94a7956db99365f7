#pragma once

// FRF data files.
//
//   input:  header `freq_hz,real,imag`, decimal floats, `#` comment lines
//   output: `freq_hz,mag_db,phase_deg` with unwrapped phase

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "resetloop/lti.hpp"

namespace resetloop {

FrequencyResponse parse_frf(std::istream& in, std::string_view source = "<stream>");
FrequencyResponse load_frf(const std::filesystem::path& path);

/// Writes `freq_hz,real,imag` with 17 significant digits.
void write_frf(std::ostream& out, const FrequencyResponse& fr);
void save_frf(const std::filesystem::path& path, const FrequencyResponse& fr);

void write_bode_csv(std::ostream& out, const FrequencyResponse& fr);

/// printf-style "%.17g".
std::string format_exact(double value);

}  // namespace resetloop
