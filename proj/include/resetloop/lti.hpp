#pragma once

// Linear time-invariant SISO building blocks.
//
// Polynomials are real coefficient lists in descending powers of s. Orders in
// this library stay below ~10 (three-pair ladders plus taming poles), where
// coefficient arithmetic is well conditioned; controllers are kept as lists of
// low-order sections and only cascaded in state-space form.

#include <complex>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace resetloop {

using Polynomial = std::vector<double>;

namespace poly {
Polynomial multiply(const Polynomial& a, const Polynomial& b);
std::complex<double> evaluate(const Polynomial& p, std::complex<double> s);
/// Drops leading zero coefficients; an all-zero polynomial becomes {0}.
Polynomial trim(Polynomial p);
int degree(const Polynomial& p);
/// Roots via companion-matrix eigenvalues.
std::vector<std::complex<double>> roots(const Polynomial& p);
}  // namespace poly

class TransferFunction {
 public:
  TransferFunction(Polynomial num, Polynomial den);

  static TransferFunction gain(double k) { return {{k}, {1.0}}; }
  /// (1 + s/omega_zero) / (1 + s/omega_pole)
  static TransferFunction lead_lag(double omega_zero, double omega_pole);
  /// 1 / (1 + s/omega_pole)
  static TransferFunction first_order_lag(double omega_pole);

  const Polynomial& num() const { return num_; }
  const Polynomial& den() const { return den_; }
  int num_degree() const { return poly::degree(num_); }
  int den_degree() const { return poly::degree(den_); }
  bool is_proper() const { return num_degree() <= den_degree(); }
  bool is_strictly_proper() const;

  std::complex<double> operator()(std::complex<double> s) const;
  std::complex<double> at_omega(double omega) const { return (*this)({0.0, omega}); }

  /// Number of poles at s = 0.
  int integrators() const;
  /// Value at s = 0; throws when there is a pole at the origin.
  double dc_gain() const;

 private:
  Polynomial num_;
  Polynomial den_;
};

struct StateSpace {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::RowVectorXd c;
  double d = 0.0;

  int order() const { return static_cast<int>(a.rows()); }
  void validate() const;
  std::complex<double> operator()(std::complex<double> s) const;
  std::complex<double> at_omega(double omega) const { return (*this)({0.0, omega}); }
};

/// Controllable canonical realization; dimension equals the denominator degree.
StateSpace tf_to_ss(const TransferFunction& tf);

/// Cascade: `first` drives `second`.
TransferFunction series(const TransferFunction& first, const TransferFunction& second);
StateSpace series(const StateSpace& first, const StateSpace& second);

struct FrequencyResponse {
  std::vector<double> omega;  // rad/s, strictly increasing, positive
  std::vector<std::complex<double>> values;
  // Samples on an imaginary-axis pole. Their value is NaN.
  std::vector<bool> singular;

  std::size_t size() const { return omega.size(); }
  void validate() const;
};

FrequencyResponse freq_response(const TransferFunction& tf, std::span<const double> grid);
FrequencyResponse freq_response(const StateSpace& ss, std::span<const double> grid);

void validate_grid(std::span<const double> grid);

/// Log-spaced grid including both ends; 50 points per decade by default.
std::vector<double> log_grid(double omega_lo, double omega_hi, double points_per_decade = 50.0);

/// Phase in degrees unwrapped along the sequence, starting from the principal value
/// of the first sample (or from the branch closest to `anchor_deg` when given).
std::vector<double> unwrap_phase_deg(std::span<const std::complex<double>> values);
std::vector<double> unwrap_phase_deg(std::span<const std::complex<double>> values, double anchor_deg);

/// Log-frequency linear interpolation of dB magnitude and unwrapped degrees.
/// Throws InputError outside the sampled range.
std::complex<double> interpolate_log(const FrequencyResponse& fr, double omega);

/// A plant given either as a rational model or as sampled FRF data.
class PlantResponse {
 public:
  explicit PlantResponse(TransferFunction model);
  explicit PlantResponse(FrequencyResponse frf, std::string source = "frf");

  std::complex<double> at(double omega) const;
  bool is_model() const { return std::holds_alternative<TransferFunction>(plant_); }
  const std::string& source() const { return source_; }
  /// Grid of the data for FRF plants; empty for models.
  std::vector<double> native_grid() const;
  /// Highest frequency at which `at` is defined (infinity for models).
  double max_omega() const;

 private:
  std::variant<TransferFunction, FrequencyResponse> plant_;
  std::string source_;
};

}  // namespace resetloop
