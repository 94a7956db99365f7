#include "resetloop/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <sstream>

#include "resetloop/errors.hpp"
#include "resetloop/matrix_exp.hpp"
#include "resetloop/spec_file.hpp"
#include "resetloop/units.hpp"

namespace resetloop {

void SimConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InputError("simulation: dt must be positive");
  if (!(duration >= 10.0 * dt) || !std::isfinite(duration)) throw InputError("simulation: duration must be at least 10 dt");
  if (!(quantization >= 0.0) || !std::isfinite(quantization)) throw InputError("simulation: quantization must be >= 0");
  if (!(noise_amplitude >= 0.0) || !std::isfinite(noise_amplitude))
    throw InputError("simulation: noise amplitude must be >= 0");
  if (!(divergence_limit > 0.0)) throw InputError("simulation: divergence limit must be positive");
}

SimMetrics metrics(const SimResult& result, double t0, double t1, std::optional<double> step_height) {
  if (!(t1 >= t0)) throw InputError("metrics: empty window");
  if (result.t.empty() || t0 < result.t.front() - 1e-12 || t1 > result.t.back() + 1e-9)
    throw InputError("metrics: window outside the simulated span");
  SimMetrics m;
  double sum_sq = 0.0;
  std::size_t count = 0;
  double y_peak = -INFINITY;
  for (std::size_t k = 0; k < result.t.size(); ++k) {
    const double t = result.t[k];
    if (t < t0 - 1e-12 || t > t1 + 1e-12) continue;
    const double e = std::abs(result.e[k]);
    sum_sq += e * e;
    m.e_max = std::max(m.e_max, e);
    y_peak = std::max(y_peak, result.y_true.empty() ? result.y[k] : result.y_true[k]);
    ++count;
  }
  if (count == 0) throw InputError("metrics: empty window");
  m.e_rms = std::sqrt(sum_sq / static_cast<double>(count));
  if (step_height) {
    if (!(*step_height != 0.0)) throw InputError("metrics: step height must be nonzero");
    m.overshoot = std::max(0.0, (y_peak - *step_height) / *step_height);
  }
  return m;
}

TransferFunction make_feedforward(const TransferFunction& plant, double relegation_omega) {
  if (!(relegation_omega > 0.0)) throw InputError("feedforward: relegation frequency must be positive");
  if (plant.num_degree() == 0 && plant.num().front() == 0.0) throw InputError("feedforward: plant is identically zero");
  for (const auto& z : poly::roots(plant.num()))
    if (z.real() >= 0.0) throw InputError("feedforward: plant has a zero in the closed right half plane");
  const int relative_degree = plant.den_degree() - plant.num_degree();
  if (relative_degree < 0) throw InputError("feedforward: improper plant");
  Polynomial den = plant.num();
  for (int i = 0; i <= relative_degree; ++i) den = poly::multiply(den, {1.0 / relegation_omega, 1.0});
  return {plant.den(), den};
}

namespace {

double quantize(double y, double q) {
  if (q == 0.0) return y;
  return std::floor(y / q + 1e-9) * q;
}

}  // namespace

SimResult simulate_closed_loop(const StateSpace& plant, const ControllerSpec& controller, const Trajectory& reference,
                               const SimConfig& cfg, const std::optional<TransferFunction>& feedforward) {
  cfg.validate();
  plant.validate();
  if (plant.d != 0.0) throw InputError("simulation: plant must be strictly proper");
  if (cfg.feedforward && !feedforward) throw InputError("simulation: feedforward enabled but no filter supplied");

  const StateSpace ctrl = controller.full_state_space();
  const StateSpace ff = cfg.feedforward ? tf_to_ss(*feedforward)
                                        : StateSpace{Eigen::MatrixXd(0, 0), Eigen::VectorXd(0), Eigen::RowVectorXd(0), 0.0};
  const Eigen::Index nc = ctrl.order(), nf = ff.order(), np = plant.order();
  const Eigen::Index n = nc + nf + np;
  const double fb = cfg.feedback ? 1.0 : 0.0;

  // z = [x_c; x_f; x_p], held inputs [e; r].
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd in = Eigen::MatrixXd::Zero(n, 2);
  m.block(0, 0, nc, nc) = ctrl.a;
  m.block(nc, nc, nf, nf) = ff.a;
  m.block(nc + nf, 0, np, nc) = fb * plant.b * ctrl.c;
  m.block(nc + nf, nc, np, nf) = plant.b * ff.c;
  m.block(nc + nf, nc + nf, np, np) = plant.a;
  in.block(0, 0, nc, 1) = ctrl.b;
  in.block(nc, 1, nf, 1) = ff.b;
  in.block(nc + nf, 0, np, 1) = fb * ctrl.d * plant.b;
  in.block(nc + nf, 1, np, 1) = ff.d * plant.b;
  // Integrate in balanced coordinates z = D w; fast taming and relegation poles
  // otherwise leave entries spanning many orders of magnitude.
  const Eigen::VectorXd scale = balancing_scales(m);
  const Eigen::VectorXd inv_scale = scale.cwiseInverse();
  const ZohDiscretization step =
      zoh_discretize(inv_scale.asDiagonal() * m * scale.asDiagonal(), inv_scale.asDiagonal() * in, cfg.dt);

  std::vector<double> gamma;
  if (controller.reset_part) gamma.assign(controller.reset_part->gamma().begin(), controller.reset_part->gamma().end());

  std::mt19937_64 rng(cfg.noise_seed);
  std::uniform_real_distribution<double> noise(-cfg.noise_amplitude, cfg.noise_amplitude);

  const auto samples = static_cast<std::size_t>(std::floor(cfg.duration / cfg.dt + 1e-9)) + 1;
  SimResult res;
  for (auto* v : {&res.t, &res.r, &res.y, &res.e, &res.u, &res.y_true}) v->reserve(samples);

  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  Eigen::Vector2d held;
  double e_prev = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    const double r = reference(t);
    const double y_true = plant.c.dot(z.segment(nc + nf, np));
    if (!std::isfinite(y_true) || std::abs(y_true) > cfg.divergence_limit) {
      std::ostringstream msg;
      msg << "simulation diverged at t = " << t << " s";
      throw NumericalError(msg.str());
    }
    double y_meas = y_true;
    if (cfg.noise_amplitude > 0.0) y_meas += noise(rng);
    y_meas = quantize(y_meas, cfg.quantization);
    const double e = r - y_meas;

    // Sign change, or arrival at exactly zero; holding at zero does not re-trigger.
    const bool crossing = (e_prev * e < 0.0) || (e == 0.0 && e_prev != 0.0);
    if (crossing && cfg.feedback && !gamma.empty()) {
      for (std::size_t i = 0; i < gamma.size(); ++i) {
        w(static_cast<Eigen::Index>(i)) *= gamma[i];
        z(static_cast<Eigen::Index>(i)) *= gamma[i];
      }
      ++res.resets;
    }
    e_prev = e;

    const double u = fb * (ctrl.c.dot(z.head(nc)) + ctrl.d * e) + ff.c.dot(z.segment(nc, nf)) + ff.d * r;
    res.t.push_back(t);
    res.r.push_back(r);
    res.y.push_back(y_meas);
    res.e.push_back(e);
    res.u.push_back(u);
    res.y_true.push_back(y_true);

    held << e, r;
    w = step.phi * w + step.gamma * held;
    z = scale.cwiseProduct(w);
  }
  return res;
}

void write_sim_csv(std::ostream& out, const SimResult& result) {
  out << "t_s,r_m,y_m,e_m,u\n";
  char buffer[160];
  for (std::size_t k = 0; k < result.t.size(); ++k) {
    std::snprintf(buffer, sizeof buffer, "%.6f,%.10g,%.10g,%.10g,%.10g\n", result.t[k], result.r[k], result.y[k],
                  result.e[k], result.u[k]);
    out << buffer;
  }
}

Scenario parse_scenario(const KeyValueFile& f) {
  f.require_known({"controller", "reference", "noise_um", "seed", "feedforward", "feedback", "dt_s", "quantization_nm",
                   "relegation_factor"});
  Scenario s;
  s.controller = f.get_string("controller").value_or(s.controller);
  s.reference = f.get_string("reference").value_or(s.reference);
  s.noise_um = f.get_double("noise_um").value_or(s.noise_um);
  if (const auto seed = f.get_int("seed")) {
    if (*seed < 0) throw InputError(f.source() + ": seed must be non-negative");
    s.seed = static_cast<std::uint64_t>(*seed);
  }
  s.feedforward = f.get_bool("feedforward").value_or(s.feedforward);
  s.feedback = f.get_bool("feedback").value_or(s.feedback);
  s.dt = f.get_double("dt_s").value_or(s.dt);
  s.quantization_nm = f.get_double("quantization_nm").value_or(s.quantization_nm);
  s.relegation_factor = f.get_double("relegation_factor").value_or(s.relegation_factor);
  if (!(s.noise_um >= 0.0)) throw InputError(f.source() + ": noise_um must be >= 0");
  named_reference(s.reference);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) { return parse_scenario(KeyValueFile::load(path)); }

ScenarioOutcome run_scenario(const Scenario& scenario) {
  const ControllerDesign design = resolve_design(scenario.controller);
  const TransferFunction plant_tf = stage_plant_model();
  const PlantResponse plant(plant_tf);
  ControllerSpec spec = assemble(design);
  const double omega_c = hz_to_rad(design.omega_c_hz);
  spec = spec.with_kp(normalize_open_loop_gain(spec, plant, omega_c));

  Reference ref = named_reference(scenario.reference);
  SimConfig cfg;
  cfg.dt = scenario.dt;
  cfg.duration = ref.sim_duration;
  cfg.quantization = scenario.quantization_nm * 1e-9;
  cfg.noise_amplitude = scenario.noise_um * 1e-6;
  cfg.noise_seed = scenario.seed;
  cfg.feedforward = scenario.feedforward;
  cfg.feedback = scenario.feedback;
  std::optional<TransferFunction> ff;
  if (scenario.feedforward) ff = make_feedforward(plant_tf, scenario.relegation_factor * omega_c);

  SimResult result = simulate_closed_loop(tf_to_ss(plant_tf), spec, ref.trajectory, cfg, ff);
  const std::optional<double> height = ref.is_step ? std::optional<double>(ref.trajectory.distance()) : std::nullopt;
  SimMetrics m = metrics(result, ref.window_start, ref.window_end, height);
  return {std::move(spec), std::move(ref), std::move(result), m};
}

}  // namespace resetloop
