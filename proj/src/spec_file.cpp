#include "resetloop/spec_file.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

#include "resetloop/errors.hpp"

namespace resetloop {

ControllerDesign parse_design(const KeyValueFile& f) {
  f.require_known({"kind", "omega_c_hz", "omega_i_hz", "a", "omega_f_hz", "poles_hz", "zeros_hz", "omega_l_hz",
                   "omega_h_hz", "gamma", "omega_r_hz", "omega_r_alpha_hz", "beta_r", "reset_order", "kp"});
  const auto kind = f.get_string("kind");
  if (!kind) throw InputError(f.source() + ": missing required key 'kind'");

  ControllerDesign d;
  d.kind = parse_controller_kind(*kind);
  if (d.kind == ControllerKind::cglp_pi) d.reset_filter_order = 2;
  d.omega_c_hz = f.get_double("omega_c_hz").value_or(d.omega_c_hz);
  d.omega_i_hz = f.get_double("omega_i_hz").value_or(d.omega_i_hz);
  d.a = f.get_double("a").value_or(d.a);
  d.omega_f_hz = f.get_double("omega_f_hz").value_or(d.omega_f_hz);
  d.poles_hz = f.get_doubles("poles_hz").value_or(std::vector<double>{});
  d.zeros_hz = f.get_doubles("zeros_hz").value_or(std::vector<double>{});
  d.omega_l_hz = f.get_double("omega_l_hz");
  d.omega_h_hz = f.get_double("omega_h_hz");
  d.gamma = f.get_doubles("gamma").value_or(std::vector<double>{});
  d.omega_r_hz = f.get_double("omega_r_hz").value_or(d.omega_r_hz);
  d.omega_r_alpha_hz = f.get_double("omega_r_alpha_hz").value_or(d.omega_r_alpha_hz);
  d.beta_r = f.get_double("beta_r").value_or(d.beta_r);
  d.reset_filter_order = f.get_int("reset_order").value_or(d.reset_filter_order);
  d.kp = f.get_double("kp").value_or(d.kp);

  // Structural checks with the offending source attached.
  try {
    assemble(d);
  } catch (const InputError& e) {
    throw InputError(f.source() + ": " + e.what());
  }
  return d;
}

ControllerDesign parse_design(std::istream& in, std::string_view source) {
  return parse_design(KeyValueFile::parse(in, source));
}

ControllerDesign load_design(const std::filesystem::path& path) { return parse_design(KeyValueFile::load(path)); }

void write_design(std::ostream& out, const ControllerDesign& d) {
  auto line = [&out](std::string_view key, const std::string& value) { out << key << " = " << value << "\n"; };
  line("kind", std::string(to_string(d.kind)));
  line("omega_c_hz", format_shortest(d.omega_c_hz));
  line("omega_i_hz", format_shortest(d.omega_i_hz));
  line("a", format_shortest(d.a));
  line("omega_f_hz", format_shortest(d.omega_f_hz));
  if (d.kind == ControllerKind::cglp_pid || d.kind == ControllerKind::cglp_pi) {
    line("omega_r_hz", format_shortest(d.omega_r_hz));
    line("omega_r_alpha_hz", format_shortest(d.omega_r_alpha_hz));
    line("beta_r", format_shortest(d.beta_r));
    line("reset_order", std::to_string(d.reset_filter_order));
  }
  if (d.kind == ControllerKind::cloc) {
    line("poles_hz", format_array(d.poles_hz));
    line("zeros_hz", format_array(d.zeros_hz));
    if (d.omega_l_hz) line("omega_l_hz", format_shortest(*d.omega_l_hz));
    if (d.omega_h_hz) line("omega_h_hz", format_shortest(*d.omega_h_hz));
  }
  if (d.kind != ControllerKind::pid) line("gamma", format_array(d.gamma));
  line("kp", format_shortest(d.kp));
}

std::string format_design(const ControllerDesign& design) {
  std::ostringstream out;
  write_design(out, design);
  return out.str();
}

ControllerDesign resolve_design(std::string_view name_or_path) {
  const auto names = reference_design_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end()) return reference_design(name_or_path);
  return load_design(std::filesystem::path(name_or_path));
}

}  // namespace resetloop
