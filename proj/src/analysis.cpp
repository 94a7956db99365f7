#include "resetloop/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "resetloop/errors.hpp"
#include "resetloop/units.hpp"

namespace resetloop {

std::vector<std::complex<double>> open_loop(const ControllerSpec& controller, const PlantResponse& plant,
                                            std::span<const double> grid, int n) {
  if (n < 1 || (n > 1 && n % 2 == 0)) throw InputError("open_loop: harmonic order must be 1 or odd");
  std::vector<std::complex<double>> out = controller.response(grid, n);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (out[i] == 0.0) continue;
    const double at = n * grid[i];
    out[i] = at <= plant.max_omega() ? out[i] * plant.at(at)
                                     : std::complex<double>(std::numeric_limits<double>::quiet_NaN(), 0.0);
  }
  return out;
}

OpenLoopView make_open_loop_view(const ControllerSpec& controller, const PlantResponse& plant,
                                 std::span<const double> grid, std::string controller_name) {
  OpenLoopView view;
  view.grid.assign(grid.begin(), grid.end());
  view.first_harmonic = open_loop(controller, plant, grid, 1);
  view.third_harmonic = open_loop(controller, plant, grid, 3);
  view.controller = std::move(controller_name);
  view.plant_source = plant.source();
  view.integrators = controller.integrators();
  return view;
}

CrossoverResult crossover_pm(const OpenLoopView& view) {
  const auto& g = view.grid;
  const auto& v = view.first_harmonic;
  if (g.size() != v.size() || g.size() < 2) throw InputError("crossover_pm: need at least two samples");
  const std::vector<double> phase = unwrap_phase_deg(v, -90.0 * view.integrators);

  CrossoverResult out;
  bool found = false;
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    const double m0 = to_db(std::abs(v[i]));
    const double m1 = to_db(std::abs(v[i + 1]));
    if (!std::isfinite(m0) || !std::isfinite(m1)) continue;
    if ((m0 >= 0.0) == (m1 >= 0.0)) continue;
    ++out.crossings;
    if (found) continue;
    found = true;
    const double f = m0 / (m0 - m1);
    const double l0 = std::log10(g[i]);
    const double l1 = std::log10(g[i + 1]);
    out.omega_c = std::pow(10.0, l0 + f * (l1 - l0));
    out.pm_deg = 180.0 + phase[i] + f * (phase[i + 1] - phase[i]);
  }
  if (!found) throw InputError("crossover_pm: open loop does not cross 0 dB within the grid");
  return out;
}

NormalizedThird normalized_third(const OpenLoopView& view) {
  if (view.first_harmonic.size() != view.grid.size() || view.third_harmonic.size() != view.grid.size())
    throw InputError("normalized_third: harmonics and grid differ in length");
  NormalizedThird out;
  for (std::size_t i = 0; i < view.grid.size(); ++i) {
    const double first = std::abs(view.first_harmonic[i]);
    const double third = std::abs(view.third_harmonic[i]);
    if (!(first >= 1e-12) || !std::isfinite(third)) continue;
    out.omega.push_back(view.grid[i]);
    out.ratio.push_back(third / first);
  }
  return out;
}

void write_open_loop_csv(std::ostream& out, const OpenLoopView& view) {
  out << "freq_hz,harmonic,mag_db,phase_deg\n";
  char buffer[128];
  auto emit = [&](const std::vector<std::complex<double>>& values, int harmonic, double anchor) {
    const auto phase = unwrap_phase_deg(values, anchor);
    for (std::size_t i = 0; i < view.grid.size(); ++i) {
      if (!std::isfinite(phase[i])) continue;
      std::snprintf(buffer, sizeof buffer, "%.10g,%d,%.10g,%.10g\n", rad_to_hz(view.grid[i]), harmonic,
                    to_db(std::abs(values[i])), phase[i]);
      out << buffer;
    }
  };
  emit(view.first_harmonic, 1, -90.0 * view.integrators);
  bool any_third = false;
  for (const auto& v : view.third_harmonic) any_third = any_third || (v != 0.0 && std::isfinite(v.real()));
  if (any_third) emit(view.third_harmonic, 3, view.third_harmonic.empty() ? 0.0 : phase_deg(view.third_harmonic.front()));
}

void write_normalized_third_csv(std::ostream& out, const NormalizedThird& curve) {
  out << "freq_hz,ratio\n";
  char buffer[96];
  for (std::size_t i = 0; i < curve.omega.size(); ++i) {
    std::snprintf(buffer, sizeof buffer, "%.10g,%.10g\n", rad_to_hz(curve.omega[i]), curve.ratio[i]);
    out << buffer;
  }
}

}  // namespace resetloop
