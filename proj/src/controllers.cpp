#include "resetloop/controllers.hpp"

#include <algorithm>
#include <cmath>

#include "resetloop/errors.hpp"
#include "resetloop/units.hpp"

namespace resetloop {

std::string_view to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::pid: return "pid";
    case ControllerKind::cglp_pid: return "cglp-pid";
    case ControllerKind::cglp_pi: return "cglp-pi";
    case ControllerKind::cloc: return "cloc";
  }
  return "unknown";
}

ControllerKind parse_controller_kind(std::string_view text) {
  if (text == "pid") return ControllerKind::pid;
  if (text == "cglp-pid") return ControllerKind::cglp_pid;
  if (text == "cglp-pi") return ControllerKind::cglp_pi;
  if (text == "cloc") return ControllerKind::cloc;
  throw InputError("unknown controller kind '" + std::string(text) + "'");
}

std::complex<double> ControllerSpec::response(double omega, int n) const {
  const double grid[] = {omega};
  return response(grid, n).front();
}

std::vector<std::complex<double>> ControllerSpec::response(std::span<const double> grid, int n) const {
  if (n < 1) throw InputError("controller response: harmonic order must be positive");
  validate_grid(grid);
  std::vector<std::complex<double>> out(grid.size(), 0.0);
  if (n > 1 && (n % 2 == 0 || !has_reset())) return out;

  std::optional<ResetKernel> kernel;
  if (reset_part) kernel.emplace(reset_part->base(), reset_part->resetting_states(), grid, n);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::complex<double> value = gain;
    if (kernel) value *= kernel->harmonic(i, n, reset_part->gamma());
    const double at = n * grid[i];
    for (const auto& part : linear_parts) value *= part.at_omega(at);
    out[i] = value;
  }
  return out;
}

int ControllerSpec::integrators() const {
  int count = 0;
  for (const auto& part : linear_parts) count += part.integrators();
  return count;
}

ControllerSpec ControllerSpec::linearized() const {
  ControllerSpec out = *this;
  if (reset_part) {
    out.reset_part = reset_part->with_gamma(std::vector<double>(reset_part->gamma().size(), 1.0));
    std::fill(out.design.gamma.begin(), out.design.gamma.end(), 1.0);
  }
  return out;
}

StateSpace ControllerSpec::linear_state_space() const {
  StateSpace out = tf_to_ss(TransferFunction::gain(gain));
  for (const auto& part : linear_parts) out = series(out, tf_to_ss(part));
  return out;
}

StateSpace ControllerSpec::full_state_space() const {
  if (!reset_part) return linear_state_space();
  return series(reset_part->base(), linear_state_space());
}

ControllerSpec ControllerSpec::with_kp(double kp) const {
  if (!(kp > 0.0) || !std::isfinite(kp)) throw InputError("controller: K_p must be positive and finite");
  ControllerSpec out = *this;
  out.gain = gain / design.kp * kp;
  out.design.kp = kp;
  return out;
}

PidFrequencies pid_corners(double omega_c, double a) {
  if (!(omega_c > 0.0)) throw InputError("pid: crossover frequency must be positive");
  if (!(a >= 1.0)) throw InputError("pid: a must be >= 1");
  return {omega_c / a, a * omega_c};
}

namespace {

TransferFunction pi_part(double omega_i) {
  if (!(omega_i > 0.0)) throw InputError("controller: omega_i must be positive");
  return {{1.0, omega_i}, {1.0, 0.0}};
}

// PI, lead (omitted for a = 1) and optional LPF, with the ordering omega_i < omega_d <= omega_t < omega_f.
std::vector<TransferFunction> pid_sections(double omega_c, double a, double omega_i, std::optional<double> omega_f) {
  const auto [omega_d, omega_t] = pid_corners(omega_c, a);
  if (!(omega_i < omega_d)) throw InputError("pid: need omega_i < omega_d = omega_c / a");
  if (omega_f && !(*omega_f > omega_t)) throw InputError("pid: need omega_f > omega_t = a omega_c");
  std::vector<TransferFunction> parts{pi_part(omega_i)};
  if (a > 1.0) parts.push_back(TransferFunction::lead_lag(omega_d, omega_t));
  if (omega_f) parts.push_back(TransferFunction::first_order_lag(*omega_f));
  return parts;
}

}  // namespace

ControllerSpec build_pid(double omega_c, double a, double omega_i, double omega_f) {
  ControllerSpec spec;
  spec.design.kind = ControllerKind::pid;
  spec.design.omega_c_hz = rad_to_hz(omega_c);
  spec.design.a = a;
  spec.design.omega_i_hz = rad_to_hz(omega_i);
  spec.design.omega_f_hz = rad_to_hz(omega_f);
  spec.linear_parts = pid_sections(omega_c, a, omega_i, omega_f);
  return spec;
}

CglpElement build_cglp(int filter_order, double omega_r, double omega_r_alpha, double beta_r, double omega_f,
                       double gamma) {
  if (!(omega_r_alpha > 0.0) || !(omega_r_alpha <= omega_r) || !(omega_r < omega_f))
    throw InputError("cglp: need 0 < omega_r_alpha <= omega_r < omega_f");
  if (filter_order == 1) {
    return {first_order_reset(omega_r_alpha, gamma), TransferFunction::lead_lag(omega_r, omega_f)};
  }
  if (filter_order == 2) {
    if (!(beta_r > 0.0)) throw InputError("cglp: beta_r must be positive");
    // Lead numerator (s/omega_r)^2 + 2 beta_r s/omega_r + 1 over a critically damped pair at omega_f.
    TransferFunction lead{{1.0 / (omega_r * omega_r), 2.0 * beta_r / omega_r, 1.0},
                          {1.0 / (omega_f * omega_f), 2.0 / omega_f, 1.0}};
    return {second_order_reset(omega_r_alpha, beta_r, gamma), std::move(lead)};
  }
  throw InputError("cglp: filter order must be 1 or 2");
}

CroneApprox cloc_ladder(const ControllerDesign& design) {
  std::vector<double> zeros, poles;
  for (double z : design.zeros_hz) zeros.push_back(hz_to_rad(z));
  for (double p : design.poles_hz) poles.push_back(hz_to_rad(p));
  if (design.omega_l_hz.has_value() != design.omega_h_hz.has_value())
    throw InputError("cloc: omega_l_hz and omega_h_hz must be given together");
  if (design.omega_l_hz) {
    ApproxBand band{hz_to_rad(*design.omega_l_hz), hz_to_rad(*design.omega_h_hz), static_cast<int>(poles.size())};
    return crone_from_corners(std::move(zeros), std::move(poles), band);
  }
  return crone_from_corners(std::move(zeros), std::move(poles));
}

ControllerSpec assemble(const ControllerDesign& d) {
  if (!(d.kp > 0.0) || !std::isfinite(d.kp)) throw InputError("controller: kp must be positive and finite");
  const double omega_c = hz_to_rad(d.omega_c_hz);
  const double omega_i = hz_to_rad(d.omega_i_hz);
  const double omega_f = hz_to_rad(d.omega_f_hz);
  ControllerSpec spec;
  spec.design = d;
  spec.gain = d.kp;

  switch (d.kind) {
    case ControllerKind::pid:
      spec.linear_parts = pid_sections(omega_c, d.a, omega_i, omega_f);
      break;
    case ControllerKind::cglp_pid:
    case ControllerKind::cglp_pi: {
      if (d.gamma.size() != 1) throw InputError("cglp: exactly one reset factor is required");
      CglpElement element = build_cglp(d.reset_filter_order, hz_to_rad(d.omega_r_hz), hz_to_rad(d.omega_r_alpha_hz),
                                       d.beta_r, omega_f, d.gamma.front());
      if (d.kind == ControllerKind::cglp_pi && d.a != 1.0) throw InputError("cglp-pi: a must be 1");
      spec.reset_part = std::move(element.reset);
      spec.linear_parts.push_back(std::move(element.lead));
      // The lead's omega_f poles already act as the low-pass filter.
      for (auto& part : pid_sections(omega_c, d.a, omega_i, std::nullopt)) spec.linear_parts.push_back(std::move(part));
      break;
    }
    case ControllerKind::cloc: {
      if (d.a != 1.0) throw InputError("cloc: a must be 1 (no linear lead)");
      const CroneApprox ladder = cloc_ladder(d);
      ComplexOrderFilter filter = split_reset(ladder, d.gamma);
      spec.reset_part = std::move(filter.c_r);
      spec.linear_parts.push_back(pi_part(omega_i));
      // C_nr kept as first-order sections; their product has badly scaled coefficients.
      for (std::size_t m = 0; m < ladder.zeros.size(); ++m)
        spec.linear_parts.push_back(TransferFunction::lead_lag(ladder.zeros[m], filter.taming_poles[m]));
      if (!(omega_f > std::max(omega_c, omega_i))) throw InputError("cloc: omega_f must exceed omega_c");
      spec.linear_parts.push_back(TransferFunction::first_order_lag(omega_f));
      const std::complex<double> linear = spec.linearized().response(omega_c, 1) / spec.gain;
      if (!(std::abs(linear) > 0.0) || !std::isfinite(std::abs(linear)))
        throw NumericalError("cloc: cannot normalize the ladder gain at omega_c");
      spec.gain = d.kp / std::abs(linear);
      break;
    }
  }
  return spec;
}

ControllerDesign reference_design(std::string_view name) {
  ControllerDesign d;
  d.omega_c_hz = 150.0;
  d.omega_i_hz = 15.0;
  d.omega_f_hz = 1500.0;
  if (name == "pid") {
    d.kind = ControllerKind::pid;
    d.a = 9.13;
  } else if (name == "cglp-pid") {
    d.kind = ControllerKind::cglp_pid;
    d.a = 2.193;
    d.omega_r_hz = 50.0;
    d.omega_r_alpha_hz = 35.7;
    d.reset_filter_order = 1;
    d.gamma = {0.0};
  } else if (name == "cglp-pi") {
    d.kind = ControllerKind::cglp_pi;
    d.a = 1.0;
    d.omega_r_hz = 78.9;
    d.omega_r_alpha_hz = 68.6138;
    d.beta_r = 1.0;
    d.reset_filter_order = 2;
    d.gamma = {0.0};
  } else if (name == "cloc-1") {
    d.kind = ControllerKind::cloc;
    d.poles_hz = {16.5, 76.6, 355.5};
    d.zeros_hz = {35.55, 165.0, 766.0};
    d.omega_l_hz = 11.24;
    d.omega_h_hz = 1124.0;
    d.gamma = {0.21, -0.22, 0.1};
  } else if (name == "cloc-2") {
    d.kind = ControllerKind::cloc;
    d.poles_hz = {27.0, 85.4, 270.0};
    d.zeros_hz = {48.0, 151.8, 480.3};
    d.omega_l_hz = 20.25;
    d.omega_h_hz = 640.3;
    d.gamma = {0.29, -0.26, 0.3};
  } else {
    throw InputError("unknown controller '" + std::string(name) + "'");
  }
  return d;
}

std::vector<std::string> reference_design_names() { return {"pid", "cglp-pid", "cglp-pi", "cloc-1", "cloc-2"}; }

ControllerSpec build_cloc(int variant) {
  if (variant == 1) return assemble(reference_design("cloc-1"));
  if (variant == 2) return assemble(reference_design("cloc-2"));
  throw InputError("cloc: variant must be 1 or 2");
}

TransferFunction stage_plant_model() { return {{1.429e8}, {175.9, 7738.0, 1.361e6}}; }

double normalize_open_loop_gain(const ControllerSpec& spec, const PlantResponse& plant, double omega_c) {
  if (!(omega_c > 0.0)) throw InputError("normalize: crossover frequency must be positive");
  const double loop = std::abs(spec.response(omega_c, 1) * plant.at(omega_c)) / spec.design.kp;
  if (!(loop > 0.0) || !std::isfinite(loop)) throw NumericalError("normalize: open-loop magnitude at omega_c is zero");
  return 1.0 / loop;
}

}  // namespace resetloop
