#include "resetloop/synthesis.hpp"

#include <algorithm>
#include <cmath>

#include "resetloop/errors.hpp"
#include "resetloop/units.hpp"

namespace resetloop {

SlopePair order_to_slopes(ComplexOrder order) {
  return {20.0 * order.alpha, order.beta * rad_to_deg(1.0) * std::log(10.0)};
}

void ApproxBand::validate() const {
  if (!(omega_l > 0.0) || !(omega_h > omega_l) || !std::isfinite(omega_h))
    throw InputError("approximation band: need 0 < omega_l < omega_h");
  if (n < 1) throw InputError("approximation band: need at least one pole/zero pair");
}

TransferFunction CroneApprox::transfer_function() const {
  TransferFunction out = TransferFunction::gain(gain);
  for (std::size_t m = 0; m < poles.size(); ++m) out = series(out, TransferFunction::lead_lag(zeros[m], poles[m]));
  return out;
}

CroneApprox crone_place(double alpha, const ApproxBand& band) {
  band.validate();
  if (!std::isfinite(alpha)) throw InputError("crone_place: alpha must be finite");
  CroneApprox out;
  out.band = band;
  out.alpha = alpha;
  const double ratio = band.omega_h / band.omega_l;
  const double two_n = 2.0 * band.n;
  for (int m = 1; m <= band.n; ++m) {
    out.zeros.push_back(band.omega_l * std::pow(ratio, (2.0 * m - 1.0 - alpha) / two_n));
    out.poles.push_back(band.omega_l * std::pow(ratio, (2.0 * m - 1.0 + alpha) / two_n));
  }
  return out;
}

namespace {

void check_corners(const std::vector<double>& zeros, const std::vector<double>& poles) {
  if (zeros.empty() || zeros.size() != poles.size()) throw InputError("ladder: need equal, nonzero numbers of zeros and poles");
  for (std::size_t m = 0; m < zeros.size(); ++m) {
    if (!(zeros[m] > 0.0) || !(poles[m] > 0.0) || !std::isfinite(zeros[m]) || !std::isfinite(poles[m]))
      throw InputError("ladder: corner frequencies must be positive and finite");
    if (m > 0 && (!(zeros[m] > zeros[m - 1]) || !(poles[m] > poles[m - 1])))
      throw InputError("ladder: corner frequencies must be strictly increasing");
  }
}

// alpha from the mean zero/pole spread relative to the pole spacing.
double infer_alpha(const std::vector<double>& zeros, const std::vector<double>& poles, double log_spacing) {
  double acc = 0.0;
  for (std::size_t m = 0; m < zeros.size(); ++m) acc += std::log(zeros[m] / poles[m]);
  return -acc / static_cast<double>(zeros.size()) / log_spacing;
}

}  // namespace

CroneApprox crone_from_corners(std::vector<double> zeros, std::vector<double> poles) {
  check_corners(zeros, poles);
  const auto n = zeros.size();
  if (n < 2) throw InputError("ladder: a single pair needs an explicit band");
  // Consecutive poles are (omega_h/omega_l)^{1/N} apart; the outermost pair sits
  // half a spacing inside omega_h.
  const double spacing = std::pow(poles.back() / poles.front(), 1.0 / static_cast<double>(n - 1));
  ApproxBand band;
  band.n = static_cast<int>(n);
  band.omega_h = std::sqrt(zeros.back() * poles.back() * spacing);
  band.omega_l = band.omega_h / std::pow(spacing, static_cast<double>(n));
  CroneApprox out;
  out.band = band;
  out.alpha = infer_alpha(zeros, poles, std::log(spacing));
  out.zeros = std::move(zeros);
  out.poles = std::move(poles);
  return out;
}

CroneApprox crone_from_corners(std::vector<double> zeros, std::vector<double> poles, const ApproxBand& band) {
  check_corners(zeros, poles);
  band.validate();
  if (static_cast<std::size_t>(band.n) != zeros.size()) throw InputError("ladder: band pair count mismatch");
  CroneApprox out;
  out.band = band;
  out.alpha = infer_alpha(zeros, poles, std::log(band.omega_h / band.omega_l) / band.n);
  out.zeros = std::move(zeros);
  out.poles = std::move(poles);
  return out;
}

std::complex<double> ComplexOrderFilter::response(double omega, int n) const {
  if (n < 1) throw InputError("filter response: harmonic order must be positive");
  const std::complex<double> reset = hosidf_at(c_r, omega, n);
  if (reset == 0.0) return 0.0;
  return gain * reset * c_nr.at_omega(n * omega);
}

ComplexOrderFilter split_reset(const CroneApprox& crone, std::vector<double> gamma, double taming_factor) {
  if (!(taming_factor >= 10.0)) throw InputError("split_reset: taming factor must be at least 10");
  if (gamma.size() != crone.poles.size()) throw InputError("split_reset: one reset factor per pole is required");
  crone.band.validate();
  ResetSystem c_r = reset_lag_chain(crone.poles, std::move(gamma));
  const double taming = taming_factor * crone.band.omega_h;
  TransferFunction c_nr = TransferFunction::gain(1.0);
  std::vector<double> taming_poles;
  for (double z : crone.zeros) {
    c_nr = series(c_nr, TransferFunction::lead_lag(z, taming));
    taming_poles.push_back(taming);
  }
  return {std::move(c_r), std::move(c_nr), crone.gain, std::move(taming_poles)};
}

SlopeFit slope_estimate(std::span<const double> omega, std::span<const std::complex<double>> values, double band_lo,
                        double band_hi) {
  if (omega.size() != values.size()) throw InputError("slope_estimate: grid and values differ in length");
  if (!(band_lo > 0.0) || !(band_hi > band_lo)) throw InputError("slope_estimate: empty band");
  const std::vector<double> phase = unwrap_phase_deg(values);
  std::vector<double> x, gain, ph;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    if (omega[i] < band_lo || omega[i] > band_hi) continue;
    const double mag = std::abs(values[i]);
    if (!(mag > 0.0) || !std::isfinite(mag) || !std::isfinite(phase[i])) continue;
    x.push_back(std::log10(omega[i]));
    gain.push_back(to_db(mag));
    ph.push_back(phase[i]);
  }
  if (x.size() < 10) throw InputError("slope_estimate: fewer than 10 samples inside the band");

  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  for (double v : x) mx += v;
  mx /= n;
  double sxx = 0.0;
  for (double v : x) sxx += (v - mx) * (v - mx);

  auto fit = [&](const std::vector<double>& y, double& slope) {
    double my = 0.0;
    for (double v : y) my += v;
    my /= n;
    double sxy = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) sxy += (x[i] - mx) * (y[i] - my);
    slope = sxy / sxx;
    double ss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double r = y[i] - (my + slope * (x[i] - mx));
      ss += r * r;
    }
    return std::sqrt(ss / n);
  };

  SlopeFit out;
  out.samples = x.size();
  out.gain_residual_rms = fit(gain, out.slopes.gain_db_per_decade);
  out.phase_residual_rms = fit(ph, out.slopes.phase_deg_per_decade);
  return out;
}

SlopeFit slope_estimate(const FrequencyResponse& fr, double band_lo, double band_hi) {
  return slope_estimate(fr.omega, fr.values, band_lo, band_hi);
}

SlopeFit slope_estimate(const HarmonicResponse& hr, double band_lo, double band_hi) {
  return slope_estimate(hr.omega, hr.values, band_lo, band_hi);
}

std::pair<double, double> trimmed_fit_band(const CroneApprox& crone, double trim) {
  if (crone.poles.empty()) throw InputError("trimmed_fit_band: empty ladder");
  if (!(trim >= 1.0)) throw InputError("trimmed_fit_band: trim factor must be >= 1");
  const double lo = crone.poles.front() * trim;
  const double hi = crone.zeros.back() / trim;
  if (!(hi > lo)) throw InputError("trimmed_fit_band: band vanishes after trimming");
  return {lo, hi};
}

}  // namespace resetloop
