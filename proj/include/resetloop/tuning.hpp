#pragma once

// Grid search over the reset factors of a CRONE pole block so that the
// describing function of C_r times C_nr matches target slopes.

#include <cstddef>
#include <optional>
#include <vector>

#include "resetloop/reset_system.hpp"
#include "resetloop/synthesis.hpp"

namespace resetloop {

struct TuneWeights {
  double gain = 1.0;    // per (dB/decade)^2
  double phase = 0.04;  // per (deg/decade)^2
};

struct TuneOptions {
  double delta = 0.1;
  TuneWeights weights;
  double taming_factor = kDefaultTamingFactor;
  double band_trim = kDefaultBandTrim;
  double points_per_decade = 50.0;

  bool refine = true;
  double refine_step = 0.01;
  int refine_candidates = 3;

  // Local mode: grid center + k * delta restricted to |gamma_i - center_i| <= radius.
  std::optional<std::vector<double>> center;
  double radius = 0.0;

  std::size_t report_size = 10;
  bool keep_all = false;  // return every coarse grid evaluation
  unsigned threads = 0;   // 0 = hardware concurrency
};

struct TunePoint {
  std::vector<double> gamma;
  SlopePair slopes;
  double objective = 0.0;  // +inf where the describing function is not computable
};

struct TuneResult {
  TunePoint best;
  std::vector<TunePoint> top;        // best coarse grid points, ascending objective
  std::vector<TunePoint> evaluated;  // filled when keep_all
  std::size_t grid_points = 0;
  std::size_t refine_points = 0;
  double band_lo = 0.0;  // rad/s
  double band_hi = 0.0;
};

/// Slope objective of one ladder, reusable across many gamma vectors.
class ArhoObjective {
 public:
  ArhoObjective(const CroneApprox& skeleton, SlopePair target, const TuneOptions& options = {});

  TunePoint evaluate(const std::vector<double>& gamma) const;
  std::size_t pairs() const { return pairs_; }
  double band_lo() const { return band_lo_; }
  double band_hi() const { return band_hi_; }

 private:
  SlopePair target_;
  TuneWeights weights_;
  std::size_t pairs_;
  double band_lo_;
  double band_hi_;
  std::vector<double> grid_;
  std::vector<std::complex<double>> linear_part_;  // C_nr on grid
  ResetKernel kernel_;
};

/// Values -1, -1 + delta, ... not exceeding 1.
std::vector<double> gamma_axis(double delta);

TuneResult tune_arho(const CroneApprox& skeleton, SlopePair target, const TuneOptions& options = {});

}  // namespace resetloop
