#include "resetloop/reset_system.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "resetloop/errors.hpp"
#include "resetloop/matrix_exp.hpp"
#include "resetloop/units.hpp"

namespace resetloop {
namespace {

constexpr double kSingularRcond = 1e-13;

[[noreturn]] void throw_singular(const char* what, double omega, double rcond) {
  std::ostringstream msg;
  msg << what << " singular at " << rad_to_hz(omega) << " Hz (condition estimate " << (rcond > 0 ? 1.0 / rcond : INFINITY)
      << ")";
  throw NumericalError(msg.str());
}

bool identity_reset(std::span<const double> gamma) {
  return std::all_of(gamma.begin(), gamma.end(), [](double g) { return g == 1.0; });
}

}  // namespace

ResetSystem::ResetSystem(StateSpace base, std::vector<double> gamma, BaseStability stability)
    : base_(std::move(base)), gamma_(std::move(gamma)), stability_(stability) {
  base_.validate();
  if (static_cast<int>(gamma_.size()) > base_.order())
    throw InputError("reset system: more reset factors than states");
  for (double g : gamma_)
    if (!(g >= -1.0 && g <= 1.0)) throw InputError("reset system: reset factors must lie in [-1, 1]");
  if (base_.order() == 0) return;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(base_.a, false);
  const double max_real = solver.eigenvalues().real().maxCoeff();
  const double scale = std::max(1.0, base_.a.norm());
  if (stability_ == BaseStability::hurwitz && !(max_real < 0.0))
    throw InputError("reset system: base A is not Hurwitz (flag it as marginal if intended)");
  if (stability_ == BaseStability::marginal && max_real > 1e-12 * scale)
    throw InputError("reset system: base A has unstable eigenvalues");
}

Eigen::MatrixXd ResetSystem::reset_matrix() const {
  Eigen::MatrixXd ar = Eigen::MatrixXd::Identity(order(), order());
  for (int i = 0; i < resetting_states(); ++i) ar(i, i) = gamma_[static_cast<std::size_t>(i)];
  return ar;
}

bool ResetSystem::is_linear() const { return identity_reset(gamma_); }

ResetSystem ResetSystem::with_gamma(std::vector<double> gamma) const {
  if (gamma.size() != gamma_.size()) throw InputError("with_gamma: reset factor count mismatch");
  return ResetSystem(base_, std::move(gamma), stability_);
}

Eigen::MatrixXd theta_d(const ResetSystem& rs, double omega) {
  if (!(omega > 0.0)) throw InputError("theta_d: omega must be positive");
  const int n = rs.order();
  const Eigen::MatrixXd& a = rs.base().a;
  if (rs.is_linear()) return Eigen::MatrixXd::Zero(n, n);

  const Eigen::MatrixXd ident = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd ar = rs.reset_matrix();
  const Eigen::MatrixXd expo = expm((kPi / omega) * a);
  const Eigen::MatrixXd lambda = omega * omega * ident + a * a;
  const Eigen::MatrixXd delta = ident + expo;
  const Eigen::MatrixXd delta_r = ident + ar * expo;

  Eigen::PartialPivLU<Eigen::MatrixXd> lambda_lu(lambda);
  if (!(lambda_lu.rcond() > kSingularRcond)) throw_singular("Lambda", omega, lambda_lu.rcond());
  Eigen::PartialPivLU<Eigen::MatrixXd> delta_r_lu(delta_r);
  if (!(delta_r_lu.rcond() > kSingularRcond)) throw_singular("Delta_R", omega, delta_r_lu.rcond());

  const Eigen::MatrixXd lambda_inv = lambda_lu.inverse();
  const Eigen::MatrixXd gamma_r = delta_r_lu.solve(ar * delta * lambda_inv);
  return -(2.0 * omega * omega / kPi) * delta * (gamma_r - lambda_inv);
}

ResetKernel::ResetKernel(const StateSpace& base, int resetting_states, std::span<const double> grid, int max_order)
    : resetting_states_(resetting_states), max_order_(max_order) {
  base.validate();
  validate_grid(grid);
  if (resetting_states < 0 || resetting_states > base.order())
    throw InputError("reset kernel: invalid resetting state count");
  if (max_order < 1) throw InputError("reset kernel: max_order must be >= 1");

  const int n = base.order();
  const Eigen::MatrixXd& a = base.a;
  const Eigen::MatrixXd ident = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXcd a_c = a.cast<std::complex<double>>();
  const Eigen::MatrixXcd ident_c = Eigen::MatrixXcd::Identity(n, n);
  const Eigen::RowVectorXcd c_c = base.c.cast<std::complex<double>>();
  const Eigen::MatrixXd a_sq = a * a;

  points_.reserve(grid.size());
  for (double omega : grid) {
    Point p;
    p.omega = omega;
    p.expo = expm((kPi / omega) * a);
    p.delta = ident + p.expo;

    Eigen::PartialPivLU<Eigen::MatrixXd> lambda_lu(omega * omega * ident + a_sq);
    if (!(lambda_lu.rcond() > kSingularRcond)) throw_singular("Lambda", omega, lambda_lu.rcond());
    p.lambda_inv_b = lambda_lu.solve(base.b);
    p.delta_lambda_inv_b = p.delta * p.lambda_inv_b;

    // Row vectors C M^{-1} are computed as solves against M^T.
    Eigen::PartialPivLU<Eigen::MatrixXcd> res_lu((std::complex<double>(0.0, omega) * ident_c - a_c).transpose());
    if (!(res_lu.rcond() > kSingularRcond)) throw_singular("j omega I - A", omega, res_lu.rcond());
    p.c_resolvent = res_lu.solve(c_c.transpose()).transpose();
    p.linear = (p.c_resolvent * base.b.cast<std::complex<double>>())(0) + base.d;

    for (int order = 3; order <= max_order; order += 2) {
      Eigen::PartialPivLU<Eigen::MatrixXcd> h_lu((a_c - std::complex<double>(0.0, omega * order) * ident_c).transpose());
      if (!(h_lu.rcond() > kSingularRcond)) throw_singular("A - j n omega I", omega, h_lu.rcond());
      p.c_harmonic.push_back(h_lu.solve(c_c.transpose()).transpose());
    }
    points_.push_back(std::move(p));
  }
}

Eigen::VectorXd ResetKernel::reset_term(const Point& p, std::span<const double> gamma) const {
  if (static_cast<int>(gamma.size()) != resetting_states_) throw InputError("reset kernel: gamma length mismatch");
  const auto n = p.expo.rows();
  // Delta_R = I + A_R e^{..}: only the resetting rows are scaled.
  Eigen::MatrixXd delta_r = p.expo;
  Eigen::VectorXd rhs = p.delta_lambda_inv_b;
  for (int i = 0; i < resetting_states_; ++i) {
    delta_r.row(i) *= gamma[static_cast<std::size_t>(i)];
    rhs(i) *= gamma[static_cast<std::size_t>(i)];
  }
  delta_r += Eigen::MatrixXd::Identity(n, n);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(delta_r);
  if (!(lu.rcond() > kSingularRcond)) throw_singular("Delta_R", p.omega, lu.rcond());
  const Eigen::VectorXd gamma_r_b = lu.solve(rhs);
  return p.delta * (gamma_r_b - p.lambda_inv_b);
}

std::complex<double> ResetKernel::first_harmonic(std::size_t i, std::span<const double> gamma) const {
  const Point& p = points_.at(i);
  if (identity_reset(gamma)) {
    if (static_cast<int>(gamma.size()) != resetting_states_) throw InputError("reset kernel: gamma length mismatch");
    return p.linear;
  }
  const Eigen::VectorXd theta_b = -(2.0 * p.omega * p.omega / kPi) * reset_term(p, gamma);
  const std::complex<double> correction = (p.c_resolvent * theta_b.cast<std::complex<double>>())(0);
  return p.linear + std::complex<double>(0.0, 1.0) * correction;
}

std::complex<double> ResetKernel::harmonic(std::size_t i, int n, std::span<const double> gamma) const {
  if (n == 1) return first_harmonic(i, gamma);
  if (n < 1) throw InputError("harmonic order must be positive");
  if (n % 2 == 0) return 0.0;
  if (n > max_order_) throw InputError("reset kernel: harmonic order above kernel max_order");
  const Point& p = points_.at(i);
  if (identity_reset(gamma)) return 0.0;
  const Eigen::VectorXd term = reset_term(p, gamma);
  const auto& row = p.c_harmonic[static_cast<std::size_t>((n - 3) / 2)];
  const std::complex<double> scale = -2.0 * p.omega * p.omega / (std::complex<double>(0.0, 1.0) * kPi);
  return scale * (row * term.cast<std::complex<double>>())(0);
}

HarmonicResponse describing_function(const ResetSystem& rs, std::span<const double> grid) {
  ResetKernel kernel(rs.base(), rs.resetting_states(), grid, 1);
  HarmonicResponse out{std::vector<double>(grid.begin(), grid.end()), 1, {}};
  out.values.reserve(grid.size());
  for (std::size_t i = 0; i < kernel.size(); ++i) out.values.push_back(kernel.first_harmonic(i, rs.gamma()));
  return out;
}

HarmonicResponse hosidf(const ResetSystem& rs, std::span<const double> grid, int n) {
  if (n < 2) throw InputError("hosidf: order must be >= 2 (order 1 is the describing function)");
  HarmonicResponse out{std::vector<double>(grid.begin(), grid.end()), n, {}};
  if (n % 2 == 0 || rs.is_linear()) {
    validate_grid(grid);
    out.values.assign(grid.size(), 0.0);
    return out;
  }
  ResetKernel kernel(rs.base(), rs.resetting_states(), grid, n);
  out.values.reserve(grid.size());
  for (std::size_t i = 0; i < kernel.size(); ++i) out.values.push_back(kernel.harmonic(i, n, rs.gamma()));
  return out;
}

std::vector<HarmonicResponse> harmonic_spectrum(const ResetSystem& rs, std::span<const double> grid, int n_max) {
  if (n_max < 1 || n_max % 2 == 0) throw InputError("harmonic_spectrum: n_max must be odd and >= 1");
  ResetKernel kernel(rs.base(), rs.resetting_states(), grid, n_max);
  std::vector<HarmonicResponse> out;
  for (int n = 1; n <= n_max; n += 2) {
    HarmonicResponse h{std::vector<double>(grid.begin(), grid.end()), n, {}};
    for (std::size_t i = 0; i < kernel.size(); ++i) h.values.push_back(kernel.harmonic(i, n, rs.gamma()));
    out.push_back(std::move(h));
  }
  return out;
}

std::complex<double> describing_function_at(const ResetSystem& rs, double omega) {
  const double grid[] = {omega};
  return ResetKernel(rs.base(), rs.resetting_states(), grid, 1).first_harmonic(0, rs.gamma());
}

std::complex<double> hosidf_at(const ResetSystem& rs, double omega, int n) {
  if (n == 1) return describing_function_at(rs, omega);
  if (n < 1) throw InputError("hosidf: order must be positive");
  if (n % 2 == 0 || rs.is_linear()) return 0.0;
  const double grid[] = {omega};
  return ResetKernel(rs.base(), rs.resetting_states(), grid, n).harmonic(0, n, rs.gamma());
}

void write_harmonic_csv(std::ostream& out, std::span<const HarmonicResponse> responses) {
  out << "freq_hz,order,mag_db,phase_deg\n";
  char buffer[128];
  for (const auto& h : responses) {
    if (h.order % 2 == 0) continue;
    const auto phase = unwrap_phase_deg(h.values);
    for (std::size_t i = 0; i < h.omega.size(); ++i) {
      std::snprintf(buffer, sizeof buffer, "%.10g,%d,%.10g,%.10g\n", rad_to_hz(h.omega[i]), h.order,
                    to_db(std::abs(h.values[i])), phase[i]);
      out << buffer;
    }
  }
}

ResetSystem clegg_integrator(double gamma) {
  StateSpace base{Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Ones(1), Eigen::RowVectorXd::Ones(1), 0.0};
  return ResetSystem(std::move(base), {gamma}, BaseStability::marginal);
}

ResetSystem first_order_reset(double omega_r, double gamma) {
  if (!(omega_r > 0.0)) throw InputError("first_order_reset: corner frequency must be positive");
  StateSpace base{Eigen::MatrixXd::Constant(1, 1, -omega_r), Eigen::VectorXd::Constant(1, omega_r),
                  Eigen::RowVectorXd::Ones(1), 0.0};
  return ResetSystem(std::move(base), {gamma});
}

ResetSystem second_order_reset(double omega_r, double beta, double gamma) {
  if (!(omega_r > 0.0) || !(beta > 0.0)) throw InputError("second_order_reset: omega_r and beta must be positive");
  StateSpace base;
  base.a.resize(2, 2);
  base.a << 0.0, 1.0, -omega_r * omega_r, -2.0 * beta * omega_r;
  base.b.resize(2);
  base.b << 0.0, omega_r * omega_r;
  base.c.resize(2);
  base.c << 1.0, 0.0;
  return ResetSystem(std::move(base), {gamma, gamma});
}

ResetSystem reset_lag_chain(std::span<const double> poles, std::vector<double> gamma) {
  const auto n = static_cast<Eigen::Index>(poles.size());
  if (n == 0) throw InputError("reset_lag_chain: no poles");
  if (static_cast<Eigen::Index>(gamma.size()) != n) throw InputError("reset_lag_chain: gamma length must equal pole count");
  StateSpace base{Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n), Eigen::RowVectorXd::Zero(n), 0.0};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p = poles[static_cast<std::size_t>(i)];
    if (!(p > 0.0)) throw InputError("reset_lag_chain: poles must be positive");
    base.a(i, i) = -p;
    if (i > 0) base.a(i, i - 1) = p;
  }
  base.b(0) = poles[0];
  base.c(n - 1) = 1.0;
  return ResetSystem(std::move(base), std::move(gamma));
}

}  // namespace resetloop
