#include "resetloop/harmonic_oracle.hpp"

#include <cmath>
#include <sstream>

#include "resetloop/errors.hpp"
#include "resetloop/matrix_exp.hpp"
#include "resetloop/units.hpp"

namespace resetloop {

OracleResult steady_state_harmonics(const ResetSystem& rs, double omega, int n_max, const OracleConfig& cfg) {
  if (!(omega > 0.0) || !std::isfinite(omega)) throw InputError("oracle: omega must be positive");
  if (n_max < 1) throw InputError("oracle: n_max must be >= 1");
  if (cfg.samples_per_period < 200 || cfg.samples_per_period % 2 != 0)
    throw InputError("oracle: samples per period must be even and >= 200");
  if (cfg.projection_periods < 1 || cfg.min_periods < 2 * cfg.projection_periods || cfg.max_periods < cfg.min_periods)
    throw InputError("oracle: inconsistent period counts");

  const StateSpace& base = rs.base();
  const Eigen::Index n = base.order();
  const int per = cfg.samples_per_period;
  const int half = per / 2;
  const double period = 2.0 * kPi / omega;
  const double h = period / per;

  // Plant driven by an exact sinusoid: q = [x; sin; cos].
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n + 2, n + 2);
  m.topLeftCorner(n, n) = base.a;
  m.block(0, n, n, 1) = base.b;
  m(n, n + 1) = omega;
  m(n + 1, n) = -omega;
  const Eigen::MatrixXd phi = expm(m * h);

  std::vector<double> gamma(rs.gamma().begin(), rs.gamma().end());
  std::vector<std::complex<double>> twiddle(static_cast<std::size_t>(n_max) * per);
  for (int k = 0; k < n_max; ++k)
    for (int i = 0; i < per; ++i)
      twiddle[static_cast<std::size_t>(k) * per + i] = std::polar(1.0, -2.0 * kPi * (k + 1) * i / per);

  Eigen::VectorXd q = Eigen::VectorXd::Zero(n + 2);
  Eigen::VectorXd next(n + 2);
  q(n + 1) = 1.0;
  auto output = [&](const Eigen::VectorXd& state) { return base.c.dot(state.head(n)) + base.d * state(n); };

  std::vector<std::complex<double>> previous, current(static_cast<std::size_t>(n_max));
  int periods = 0;
  long resets_in_block = 0;
  while (true) {
    std::fill(current.begin(), current.end(), 0.0);
    resets_in_block = 0;
    for (int p = 0; p < cfg.projection_periods; ++p, ++periods) {
      // y at the start of the period, after any reset applied there.
      double y_left = output(q);
      for (int i = 0; i < per; ++i) {
        next.noalias() = phi * q;
        q.swap(next);
        const int k = i + 1;
        // Re-anchor the oscillator to avoid drift; crossings are exact zeros.
        q(n) = (k % half == 0) ? 0.0 : std::sin(2.0 * kPi * k / per);
        q(n + 1) = (k % half == 0) ? ((k / half) % 2 == 0 ? 1.0 : -1.0) : std::cos(2.0 * kPi * k / per);
        const double y_right = output(q);  // limit from the left
        for (int order = 0; order < n_max; ++order) {
          const auto* tw = &twiddle[static_cast<std::size_t>(order) * per];
          current[static_cast<std::size_t>(order)] += 0.5 * h * (y_left * tw[i] + y_right * tw[(i + 1) % per]);
        }
        if (k % half == 0) {
          for (std::size_t r = 0; r < gamma.size(); ++r) q(static_cast<Eigen::Index>(r)) *= gamma[r];
          ++resets_in_block;
        }
        y_left = output(q);
      }
      if (!q.allFinite()) throw NumericalError("oracle: state became non-finite");
    }
    for (auto& c : current) c *= 2.0 / (period * cfg.projection_periods);

    if (!previous.empty() && periods >= cfg.min_periods) {
      double change = 0.0;
      for (int k = 0; k < n_max; ++k)
        change = std::max(change, std::abs(current[static_cast<std::size_t>(k)] - previous[static_cast<std::size_t>(k)]));
      const double scale = std::max(std::abs(current[0]), 1e-300);
      if (change <= cfg.settle_tolerance * scale) break;
    }
    if (periods >= cfg.max_periods) {
      std::ostringstream msg;
      msg << "oracle: output did not settle within " << cfg.max_periods << " periods at " << rad_to_hz(omega) << " Hz";
      throw NumericalError(msg.str());
    }
    previous = current;
  }

  OracleResult out;
  out.periods = periods;
  out.resets_per_period = static_cast<double>(resets_in_block) / cfg.projection_periods;
  for (const auto& c : current) out.harmonics.push_back(std::complex<double>(0.0, 1.0) * c);
  return out;
}

}  // namespace resetloop
