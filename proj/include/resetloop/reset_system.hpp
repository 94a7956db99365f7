#pragma once

// Reset systems with zero-crossing resets and their closed-form frequency
// analysis: the describing function (first harmonic) and the higher-order
// sinusoidal-input describing functions for odd harmonics.
//
// The flow is x' = Ax + Be, y = Cx + De. Whenever the input e crosses zero the
// state jumps to A_R x with A_R = blockdiag(diag(gamma), I); resetting states
// come first in the state vector.

#include <complex>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "resetloop/lti.hpp"

namespace resetloop {

enum class BaseStability {
  hurwitz,   // all eigenvalues of A strictly in the left half plane
  marginal,  // eigenvalues on the imaginary axis allowed (Clegg integrator)
};

class ResetSystem {
 public:
  ResetSystem(StateSpace base, std::vector<double> gamma, BaseStability stability = BaseStability::hurwitz);

  const StateSpace& base() const { return base_; }
  std::span<const double> gamma() const { return gamma_; }
  int resetting_states() const { return static_cast<int>(gamma_.size()); }
  int order() const { return base_.order(); }
  BaseStability stability() const { return stability_; }

  Eigen::MatrixXd reset_matrix() const;
  /// True when every gamma equals 1, i.e. resets are identities.
  bool is_linear() const;

  ResetSystem with_gamma(std::vector<double> gamma) const;

 private:
  StateSpace base_;
  std::vector<double> gamma_;
  BaseStability stability_;
};

struct HarmonicResponse {
  std::vector<double> omega;  // rad/s
  int order = 1;
  std::vector<std::complex<double>> values;
};

/// Theta_D(omega) = -(2 omega^2 / pi) Delta (Gamma_R - Lambda^{-1}); identically zero for A_R = I.
Eigen::MatrixXd theta_d(const ResetSystem& rs, double omega);

HarmonicResponse describing_function(const ResetSystem& rs, std::span<const double> grid);
/// n >= 2. Even orders are exact zeros; odd orders use the closed form.
HarmonicResponse hosidf(const ResetSystem& rs, std::span<const double> grid, int n);
/// Orders 1, 3, ..., n_max (n_max odd).
std::vector<HarmonicResponse> harmonic_spectrum(const ResetSystem& rs, std::span<const double> grid, int n_max);

std::complex<double> describing_function_at(const ResetSystem& rs, double omega);
std::complex<double> hosidf_at(const ResetSystem& rs, double omega, int n);

// Per-frequency factors of the describing-function formulas that do not depend
// on the reset matrix. Sweeps over gamma (tuning) reuse one kernel.
class ResetKernel {
 public:
  ResetKernel(const StateSpace& base, int resetting_states, std::span<const double> grid, int max_order = 1);

  std::size_t size() const { return points_.size(); }
  double omega(std::size_t i) const { return points_[i].omega; }
  int resetting_states() const { return resetting_states_; }

  std::complex<double> first_harmonic(std::size_t i, std::span<const double> gamma) const;
  /// Odd n >= 3 up to max_order; even n gives exactly 0.
  std::complex<double> harmonic(std::size_t i, int n, std::span<const double> gamma) const;

 private:
  struct Point {
    double omega = 0.0;
    Eigen::MatrixXd expo;                  // e^{(pi/omega) A}
    Eigen::MatrixXd delta;                 // I + e^{(pi/omega) A}
    Eigen::VectorXd lambda_inv_b;          // (omega^2 I + A^2)^{-1} B
    Eigen::VectorXd delta_lambda_inv_b;    // Delta Lambda^{-1} B
    std::complex<double> linear;           // C (j omega I - A)^{-1} B + D
    Eigen::RowVectorXcd c_resolvent;       // C (j omega I - A)^{-1}
    std::vector<Eigen::RowVectorXcd> c_harmonic;  // C (A - j n omega I)^{-1}, n = 3, 5, ...
  };

  // Delta (Gamma_R - Lambda^{-1}) B, or empty when A_R = I.
  Eigen::VectorXd reset_term(const Point& p, std::span<const double> gamma) const;

  int resetting_states_;
  int max_order_;
  std::vector<Point> points_;
};

/// `freq_hz,order,mag_db,phase_deg`; even orders are omitted (identically zero).
void write_harmonic_csv(std::ostream& out, std::span<const HarmonicResponse> responses);

// Common reset elements.
ResetSystem clegg_integrator(double gamma = 0.0);
/// 1/(s/omega_r + 1) with its state resetting by gamma.
ResetSystem first_order_reset(double omega_r, double gamma);
/// 1/((s/omega_r)^2 + 2 beta s/omega_r + 1), both states resetting by gamma.
ResetSystem second_order_reset(double omega_r, double beta, double gamma);
/// Series chain of 1/(1 + s/p_m) with pole m's output as state m; the first pole is driven by the input.
ResetSystem reset_lag_chain(std::span<const double> poles, std::vector<double> gamma);

}  // namespace resetloop
