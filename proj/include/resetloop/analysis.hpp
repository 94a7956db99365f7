#pragma once

// Open-loop harmonics of controller times plant, crossover and phase margin,
// and the third harmonic normalized by the first.

#include <complex>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "resetloop/controllers.hpp"
#include "resetloop/lti.hpp"

namespace resetloop {

/// n = 1: describing function of the loop. n >= 3: the reset part's n-th
/// harmonic at omega with linear parts and plant at n omega. Samples where the
/// plant is undefined at n omega (beyond FRF data) are NaN.
std::vector<std::complex<double>> open_loop(const ControllerSpec& controller, const PlantResponse& plant,
                                            std::span<const double> grid, int n);

struct OpenLoopView {
  std::vector<double> grid;  // rad/s
  std::vector<std::complex<double>> first_harmonic;
  std::vector<std::complex<double>> third_harmonic;
  std::string controller;
  std::string plant_source;
  int integrators = 0;  // free integrators in the loop, anchors the phase at low frequency
};

OpenLoopView make_open_loop_view(const ControllerSpec& controller, const PlantResponse& plant,
                                 std::span<const double> grid, std::string controller_name);

struct CrossoverResult {
  double omega_c = 0.0;  // rad/s, lowest 0 dB crossing
  double pm_deg = 0.0;
  int crossings = 0;     // more than one means the lowest was selected
};

CrossoverResult crossover_pm(const OpenLoopView& view);

struct NormalizedThird {
  std::vector<double> omega;  // rad/s; samples with |OL1| < 1e-12 are dropped
  std::vector<double> ratio;
};

NormalizedThird normalized_third(const OpenLoopView& view);

/// `freq_hz,harmonic,mag_db,phase_deg` (harmonics 1 and 3, the latter omitted when identically zero).
void write_open_loop_csv(std::ostream& out, const OpenLoopView& view);
/// `freq_hz,ratio`
void write_normalized_third_csv(std::ostream& out, const NormalizedThird& curve);

}  // namespace resetloop
