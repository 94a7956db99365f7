#include "resetloop/lti.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "resetloop/errors.hpp"
#include "resetloop/matrix_exp.hpp"
#include "resetloop/units.hpp"

namespace resetloop {

namespace poly {

Polynomial multiply(const Polynomial& a, const Polynomial& b) {
  if (a.empty() || b.empty()) return {0.0};
  Polynomial out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

std::complex<double> evaluate(const Polynomial& p, std::complex<double> s) {
  std::complex<double> acc = 0.0;
  for (double c : p) acc = acc * s + c;
  return acc;
}

Polynomial trim(Polynomial p) {
  auto first = std::find_if(p.begin(), p.end(), [](double c) { return c != 0.0; });
  if (first == p.end()) return {0.0};
  p.erase(p.begin(), first);
  return p;
}

int degree(const Polynomial& p) { return static_cast<int>(p.size()) - 1; }

std::vector<std::complex<double>> roots(const Polynomial& p) {
  const Polynomial q = trim(p);
  const int n = degree(q);
  if (n <= 0) return {};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) companion(0, i) = -q[i + 1] / q[0];
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  std::vector<std::complex<double>> out;
  for (int i = 0; i < n; ++i) out.push_back(solver.eigenvalues()(i));
  return out;
}

}  // namespace poly

namespace {

bool all_finite(const Polynomial& p) {
  return std::all_of(p.begin(), p.end(), [](double c) { return std::isfinite(c); });
}

// Scale of the terms summed when evaluating p at s; used to judge cancellation.
double evaluation_scale(const Polynomial& p, double abs_s) {
  double acc = 0.0;
  for (double c : p) acc = acc * abs_s + std::abs(c);
  return acc;
}

}  // namespace

TransferFunction::TransferFunction(Polynomial num, Polynomial den)
    : num_(poly::trim(std::move(num))), den_(std::move(den)) {
  if (den_.empty()) throw InputError("transfer function: empty denominator");
  if (den_.front() == 0.0) throw InputError("transfer function: leading denominator coefficient is zero");
  if (!all_finite(num_) || !all_finite(den_))
    throw NumericalError("transfer function: non-finite coefficient");
}

TransferFunction TransferFunction::lead_lag(double omega_zero, double omega_pole) {
  if (!(omega_zero > 0.0) || !(omega_pole > 0.0)) throw InputError("lead_lag: corner frequencies must be positive");
  return {{1.0 / omega_zero, 1.0}, {1.0 / omega_pole, 1.0}};
}

TransferFunction TransferFunction::first_order_lag(double omega_pole) {
  if (!(omega_pole > 0.0)) throw InputError("first_order_lag: corner frequency must be positive");
  return {{1.0}, {1.0 / omega_pole, 1.0}};
}

bool TransferFunction::is_strictly_proper() const {
  if (num_.size() == 1 && num_[0] == 0.0) return true;
  return num_degree() < den_degree();
}

std::complex<double> TransferFunction::operator()(std::complex<double> s) const {
  return poly::evaluate(num_, s) / poly::evaluate(den_, s);
}

int TransferFunction::integrators() const {
  int count = 0;
  for (auto it = den_.rbegin(); it != den_.rend() && *it == 0.0; ++it) ++count;
  return count;
}

double TransferFunction::dc_gain() const {
  if (integrators() > 0) throw NumericalError("dc_gain: pole at the origin");
  return num_.back() / den_.back();
}

void StateSpace::validate() const {
  const auto n = a.rows();
  if (a.cols() != n || b.size() != n || c.size() != n)
    throw InputError("state space: inconsistent dimensions");
  if (!a.allFinite() || !b.allFinite() || !c.allFinite() || !std::isfinite(d))
    throw NumericalError("state space: non-finite entry");
}

std::complex<double> StateSpace::operator()(std::complex<double> s) const {
  const auto n = a.rows();
  if (n == 0) return d;
  // Balanced coordinates keep companion-form realizations well conditioned.
  const Eigen::VectorXd scale = balancing_scales(a);
  const Eigen::MatrixXd ab = scale.cwiseInverse().asDiagonal() * a * scale.asDiagonal();
  Eigen::MatrixXcd m = s * Eigen::MatrixXcd::Identity(n, n) - ab.cast<std::complex<double>>();
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
  if (!(lu.rcond() > 1e-14)) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
  const Eigen::VectorXcd x = lu.solve(b.cwiseQuotient(scale).cast<std::complex<double>>());
  return (c.cwiseProduct(scale.transpose()).cast<std::complex<double>>() * x)(0) + d;
}

StateSpace tf_to_ss(const TransferFunction& tf) {
  if (!tf.is_proper()) throw InputError("tf_to_ss: improper transfer function");
  const Polynomial& den = tf.den();
  const int n = tf.den_degree();
  const double lead = den.front();

  Polynomial num(static_cast<std::size_t>(n + 1), 0.0);
  const Polynomial& raw = tf.num();
  std::copy(raw.begin(), raw.end(), num.end() - static_cast<std::ptrdiff_t>(raw.size()));

  StateSpace ss;
  ss.a = Eigen::MatrixXd::Zero(n, n);
  ss.b = Eigen::VectorXd::Zero(n);
  ss.c = Eigen::RowVectorXd::Zero(n);
  ss.d = num[0] / lead;
  for (int i = 0; i < n; ++i) {
    const double ai = den[i + 1] / lead;
    ss.a(0, i) = -ai;
    ss.c(i) = num[i + 1] / lead - ai * ss.d;
  }
  for (int i = 1; i < n; ++i) ss.a(i, i - 1) = 1.0;
  if (n > 0) ss.b(0) = 1.0;
  return ss;
}

TransferFunction series(const TransferFunction& first, const TransferFunction& second) {
  TransferFunction out(poly::multiply(first.num(), second.num()), poly::multiply(first.den(), second.den()));
  return out;
}

StateSpace series(const StateSpace& first, const StateSpace& second) {
  first.validate();
  second.validate();
  const int n1 = first.order();
  const int n2 = second.order();
  StateSpace out;
  out.a = Eigen::MatrixXd::Zero(n1 + n2, n1 + n2);
  out.a.topLeftCorner(n1, n1) = first.a;
  out.a.bottomRightCorner(n2, n2) = second.a;
  out.a.bottomLeftCorner(n2, n1) = second.b * first.c;
  out.b.resize(n1 + n2);
  out.b << first.b, second.b * first.d;
  out.c.resize(n1 + n2);
  out.c << second.d * first.c, second.c;
  out.d = second.d * first.d;
  if (!out.a.allFinite()) throw NumericalError("series: overflow in cascade");
  return out;
}

void FrequencyResponse::validate() const {
  if (values.size() != omega.size()) throw InputError("frequency response: length mismatch");
  validate_grid(omega);
}

void validate_grid(std::span<const double> grid) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i]))
      throw InputError("frequency grid: entries must be positive and finite");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw InputError("frequency grid: must be strictly increasing");
  }
}

FrequencyResponse freq_response(const TransferFunction& tf, std::span<const double> grid) {
  validate_grid(grid);
  FrequencyResponse out;
  out.omega.assign(grid.begin(), grid.end());
  out.values.reserve(grid.size());
  out.singular.reserve(grid.size());
  for (double w : grid) {
    const std::complex<double> s{0.0, w};
    const std::complex<double> den = poly::evaluate(tf.den(), s);
    const bool singular = std::abs(den) <= 1e-14 * evaluation_scale(tf.den(), w);
    out.singular.push_back(singular);
    out.values.push_back(singular ? std::complex<double>{std::numeric_limits<double>::quiet_NaN(), 0.0}
                                  : poly::evaluate(tf.num(), s) / den);
  }
  return out;
}

FrequencyResponse freq_response(const StateSpace& ss, std::span<const double> grid) {
  validate_grid(grid);
  ss.validate();
  FrequencyResponse out;
  out.omega.assign(grid.begin(), grid.end());
  for (double w : grid) {
    const auto v = ss.at_omega(w);
    const bool singular = std::isnan(v.real());
    out.values.push_back(v);
    out.singular.push_back(singular);
  }
  return out;
}

std::vector<double> log_grid(double omega_lo, double omega_hi, double points_per_decade) {
  if (!(omega_lo > 0.0) || !(omega_hi > omega_lo)) throw InputError("log_grid: need 0 < lo < hi");
  if (!(points_per_decade > 0.0)) throw InputError("log_grid: points per decade must be positive");
  const double decades = std::log10(omega_hi / omega_lo);
  const auto intervals = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(decades * points_per_decade - 1e-9)));
  std::vector<double> grid(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i)
    grid[i] = omega_lo * std::pow(10.0, decades * static_cast<double>(i) / static_cast<double>(intervals));
  grid.front() = omega_lo;
  grid.back() = omega_hi;
  return grid;
}

std::vector<double> unwrap_phase_deg(std::span<const std::complex<double>> values) {
  if (values.empty()) return {};
  return unwrap_phase_deg(values, phase_deg(values.front()));
}

std::vector<double> unwrap_phase_deg(std::span<const std::complex<double>> values, double anchor_deg) {
  std::vector<double> out;
  out.reserve(values.size());
  double previous = anchor_deg;
  for (const auto& v : values) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()) || v == 0.0) {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    double p = phase_deg(v);
    p += 360.0 * std::round((previous - p) / 360.0);
    out.push_back(p);
    previous = p;
  }
  return out;
}

std::complex<double> interpolate_log(const FrequencyResponse& fr, double omega) {
  if (fr.omega.empty()) throw InputError("interpolate_log: empty response");
  const auto& w = fr.omega;
  const double rel = 1e-12;
  if (omega < w.front() * (1.0 - rel) || omega > w.back() * (1.0 + rel)) {
    std::ostringstream msg;
    msg << "interpolate_log: " << rad_to_hz(omega) << " Hz outside data range [" << rad_to_hz(w.front())
        << ", " << rad_to_hz(w.back()) << "] Hz";
    throw InputError(msg.str());
  }
  if (w.size() == 1) return fr.values.front();
  auto hi = std::upper_bound(w.begin(), w.end(), omega);
  if (hi == w.end()) hi = w.end() - 1;
  if (hi == w.begin()) hi = w.begin() + 1;
  const auto i = static_cast<std::size_t>(hi - w.begin()) - 1;
  const double t = std::clamp(std::log(omega / w[i]) / std::log(w[i + 1] / w[i]), 0.0, 1.0);
  const auto& v0 = fr.values[i];
  const auto& v1 = fr.values[i + 1];
  const double db = to_db(std::abs(v0)) * (1.0 - t) + to_db(std::abs(v1)) * t;
  const double p0 = phase_deg(v0);
  double p1 = phase_deg(v1);
  p1 += 360.0 * std::round((p0 - p1) / 360.0);
  const double p = p0 * (1.0 - t) + p1 * t;
  return std::polar(from_db(db), deg_to_rad(p));
}

PlantResponse::PlantResponse(TransferFunction model) : plant_(std::move(model)), source_("model") {}

PlantResponse::PlantResponse(FrequencyResponse frf, std::string source)
    : plant_(std::move(frf)), source_(std::move(source)) {
  std::get<FrequencyResponse>(plant_).validate();
}

std::complex<double> PlantResponse::at(double omega) const {
  if (const auto* tf = std::get_if<TransferFunction>(&plant_)) return tf->at_omega(omega);
  return interpolate_log(std::get<FrequencyResponse>(plant_), omega);
}

std::vector<double> PlantResponse::native_grid() const {
  if (const auto* fr = std::get_if<FrequencyResponse>(&plant_)) return fr->omega;
  return {};
}

double PlantResponse::max_omega() const {
  if (const auto* fr = std::get_if<FrequencyResponse>(&plant_)) return fr->omega.back();
  return std::numeric_limits<double>::infinity();
}

}  // namespace resetloop
