#pragma once

// PID, CgLp and CLOC controllers: Hz-denominated designs and their assembled
// form (reset element first, then linear sections, then gain).

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "resetloop/lti.hpp"
#include "resetloop/reset_system.hpp"
#include "resetloop/synthesis.hpp"

namespace resetloop {

enum class ControllerKind { pid, cglp_pid, cglp_pi, cloc };

std::string_view to_string(ControllerKind kind);
ControllerKind parse_controller_kind(std::string_view text);

/// User-facing parameters, all frequencies in Hz.
struct ControllerDesign {
  ControllerKind kind = ControllerKind::pid;
  double omega_c_hz = 150.0;
  double omega_i_hz = 15.0;
  double a = 1.0;
  double omega_f_hz = 1500.0;
  // CLOC ladder
  std::vector<double> poles_hz;
  std::vector<double> zeros_hz;
  std::optional<double> omega_l_hz;  // explicit band; inferred from the ladder when absent
  std::optional<double> omega_h_hz;
  // CgLp
  double omega_r_hz = 0.0;
  double omega_r_alpha_hz = 0.0;
  double beta_r = 1.0;
  int reset_filter_order = 1;  // 1 = FORE, 2 = SORE
  // reset factors (CgLp: one value; CLOC: one per pole)
  std::vector<double> gamma;
  double kp = 1.0;

  bool operator==(const ControllerDesign&) const = default;
};

struct ControllerSpec {
  ControllerDesign design;
  std::optional<ResetSystem> reset_part;
  std::vector<TransferFunction> linear_parts;
  double gain = 1.0;  // kp times any internal normalization constant

  /// Harmonic n of the controller at excitation omega: the reset part's
  /// harmonic at omega, linear parts evaluated at n omega.
  std::complex<double> response(double omega, int n = 1) const;
  std::vector<std::complex<double>> response(std::span<const double> grid, int n = 1) const;

  int integrators() const;
  bool has_reset() const { return reset_part.has_value() && !reset_part->is_linear(); }
  /// Same controller with every reset factor set to 1.
  ControllerSpec linearized() const;
  /// Linear parts and gain as one state-space system (reset part excluded).
  StateSpace linear_state_space() const;
  /// Reset part followed by the linear parts; reset states come first.
  StateSpace full_state_space() const;
  ControllerSpec with_kp(double kp) const;
};

struct PidFrequencies {
  double omega_d = 0.0;
  double omega_t = 0.0;
};
/// omega_d = omega_c / a, omega_t = a omega_c.
PidFrequencies pid_corners(double omega_c, double a);

/// All inputs in rad/s. K_p starts at 1.
ControllerSpec build_pid(double omega_c, double a, double omega_i, double omega_f);

struct CglpElement {
  ResetSystem reset;
  TransferFunction lead;
};
/// Reset lag at omega_r_alpha (with beta_r for order 2) and lead from omega_r to omega_f.
CglpElement build_cglp(int filter_order, double omega_r, double omega_r_alpha, double beta_r, double omega_f,
                       double gamma);

/// Assembles any design. CLOC ladders get the gain that gives the linear-limit
/// controller unit magnitude at omega_c (before K_p).
ControllerSpec assemble(const ControllerDesign& design);

/// The CLOC ladder of a design as a CRONE approximation (rad/s).
CroneApprox cloc_ladder(const ControllerDesign& design);

/// Reference designs: "pid", "cglp-pid", "cglp-pi", "cloc-1", "cloc-2". K_p = 1.
ControllerDesign reference_design(std::string_view name);
std::vector<std::string> reference_design_names();
ControllerSpec build_cloc(int variant);

/// 1.429e8 / (175.9 s^2 + 7738 s + 1.361e6)
TransferFunction stage_plant_model();

/// K_p giving |C(j omega_c) P(j omega_c)| = 1 with the describing function.
double normalize_open_loop_gain(const ControllerSpec& spec, const PlantResponse& plant, double omega_c);

}  // namespace resetloop
