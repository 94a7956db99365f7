#pragma once

// Time-domain harmonic measurement of a reset system driven open loop by
// sin(omega t). Used to cross-check the closed-form describing functions.

#include <complex>
#include <vector>

#include "resetloop/reset_system.hpp"

namespace resetloop {

struct OracleConfig {
  int samples_per_period = 4000;  // even, so the zero crossings fall on samples
  int min_periods = 20;
  int max_periods = 4000;
  int projection_periods = 10;
  double settle_tolerance = 1e-9;  // relative change between consecutive blocks
};

struct OracleResult {
  std::vector<std::complex<double>> harmonics;  // index n - 1 holds harmonic n
  double periods = 0.0;
  double resets_per_period = 0.0;  // over the projection window
};

/// Complex gains of harmonics n = 1..n_max, each as (output component at n omega)
/// relative to the unit input sinusoid.
OracleResult steady_state_harmonics(const ResetSystem& rs, double omega, int n_max, const OracleConfig& cfg = {});

}  // namespace resetloop
