#pragma once

// Controller spec files (Hz-denominated `key = value`).
//
//   kind = cloc
//   omega_c_hz = 150
//   omega_i_hz = 15
//   poles_hz = [16.5, 76.6, 355.5]
//   zeros_hz = [35.55, 165, 766]
//   gamma = [0.21, -0.22, 0.1]
//   kp = 1

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "resetloop/controllers.hpp"
#include "resetloop/key_value.hpp"

namespace resetloop {

ControllerDesign parse_design(const KeyValueFile& file);
ControllerDesign parse_design(std::istream& in, std::string_view source = "<stream>");
ControllerDesign load_design(const std::filesystem::path& path);

/// Writes only the keys meaningful for the design's kind.
void write_design(std::ostream& out, const ControllerDesign& design);
std::string format_design(const ControllerDesign& design);

/// A reference design name ("pid", "cloc-1", ...) or a path to a spec file.
ControllerDesign resolve_design(std::string_view name_or_path);

}  // namespace resetloop
