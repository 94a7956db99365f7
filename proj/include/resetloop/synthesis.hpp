#pragma once

// CRONE real-order ladders and their split into a resetting pole block and a
// linear zero block, which together approximate a complex-order derivative.

#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "resetloop/lti.hpp"
#include "resetloop/reset_system.hpp"

namespace resetloop {

struct ComplexOrder {
  double alpha = 0.0;  // real part
  double beta = 0.0;   // imaginary part
};

struct SlopePair {
  double gain_db_per_decade = 0.0;
  double phase_deg_per_decade = 0.0;
};

/// Slopes of s^{alpha + j beta}: 20 alpha dB/decade and beta (180/pi) ln 10 deg/decade.
SlopePair order_to_slopes(ComplexOrder order);

struct ApproxBand {
  double omega_l = 0.0;  // rad/s
  double omega_h = 0.0;  // rad/s
  int n = 1;             // pole/zero pairs

  void validate() const;
};

struct CroneApprox {
  ApproxBand band;
  double alpha = 0.0;
  std::vector<double> zeros;  // rad/s, ascending
  std::vector<double> poles;  // rad/s, ascending
  double gain = 1.0;

  /// gain * prod (1 + s/z_m) / (1 + s/p_m)
  TransferFunction transfer_function() const;
};

CroneApprox crone_place(double alpha, const ApproxBand& band);

/// A ladder given by explicit corner frequencies. The band is supplied or, for
/// n >= 2, inferred from the outermost pair and the pole spacing.
CroneApprox crone_from_corners(std::vector<double> zeros, std::vector<double> poles);
CroneApprox crone_from_corners(std::vector<double> zeros, std::vector<double> poles, const ApproxBand& band);

inline constexpr double kDefaultTamingFactor = 20.0;

struct ComplexOrderFilter {
  ResetSystem c_r;             // resetting poles, ascending series chain
  TransferFunction c_nr;       // zeros over taming poles
  double gain = 1.0;
  std::vector<double> taming_poles;

  /// Harmonic n of gain * C_r (DF for n = 1) times C_nr evaluated at n omega.
  std::complex<double> response(double omega, int n = 1) const;
};

ComplexOrderFilter split_reset(const CroneApprox& crone, std::vector<double> gamma,
                               double taming_factor = kDefaultTamingFactor);

struct SlopeFit {
  SlopePair slopes;
  double gain_residual_rms = 0.0;   // dB
  double phase_residual_rms = 0.0;  // degrees
  std::size_t samples = 0;
};

/// Least-squares lines of dB magnitude and unwrapped phase against log10(omega)
/// over samples with omega in [band_lo, band_hi]. Needs at least 10 samples.
SlopeFit slope_estimate(std::span<const double> omega, std::span<const std::complex<double>> values, double band_lo,
                        double band_hi);
SlopeFit slope_estimate(const FrequencyResponse& fr, double band_lo, double band_hi);
SlopeFit slope_estimate(const HarmonicResponse& hr, double band_lo, double band_hi);

inline constexpr double kDefaultBandTrim = 1.5;

/// [p_1 * trim, z_N / trim]
std::pair<double, double> trimmed_fit_band(const CroneApprox& crone, double trim = kDefaultBandTrim);

}  // namespace resetloop
