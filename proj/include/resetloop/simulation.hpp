#pragma once

// Sampled closed-loop simulation with reset jumps.
//
// At each sample t_k the measured output is formed (noise added, then
// quantized), the error e_k = r_k - y_k is computed and the reset rule is
// applied. Between samples e_k and r_k are held while controller, feedforward
// and plant states are advanced together by the exact matrix exponential.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "resetloop/controllers.hpp"
#include "resetloop/key_value.hpp"
#include "resetloop/lti.hpp"
#include "resetloop/trajectory.hpp"

namespace resetloop {

struct SimConfig {
  double dt = 1e-4;               // s
  double duration = 0.5;          // s
  double quantization = 100e-9;   // m, 0 disables
  double noise_amplitude = 0.0;   // m, uniform in [-a, a]
  std::uint64_t noise_seed = 0;
  bool feedforward = false;
  bool feedback = true;
  double divergence_limit = 1.0;  // |y| in m beyond which the run is declared divergent

  void validate() const;
};

struct SimResult {
  std::vector<double> t, r, y, e, u;  // y is the measured output; e = r - y
  std::vector<double> y_true;         // plant output before noise and quantization
  std::size_t resets = 0;
};

struct SimMetrics {
  double e_rms = 0.0;      // m
  double e_max = 0.0;      // m
  double overshoot = 0.0;  // fraction of the step height; 0 for non-step references
};

inline constexpr double kTableUnit = 100e-9;  // metric reports use 100 nm units

/// Metrics over t in [t0, t1]. Overshoot uses the plant output (before noise and
/// quantization) relative to `step_height`.
SimMetrics metrics(const SimResult& result, double t0, double t1, std::optional<double> step_height = std::nullopt);

/// Plant inverse with real poles at relegation_omega making it strictly proper.
TransferFunction make_feedforward(const TransferFunction& plant, double relegation_omega);

/// Plant must be strictly proper. `feedforward` is used when cfg.feedforward is set.
SimResult simulate_closed_loop(const StateSpace& plant, const ControllerSpec& controller, const Trajectory& reference,
                               const SimConfig& cfg, const std::optional<TransferFunction>& feedforward = std::nullopt);

void write_sim_csv(std::ostream& out, const SimResult& result);

/// Scenario files: `controller`, `reference`, `noise_um`, `seed`, `feedforward`,
/// plus optional `feedback`, `dt_s`, `quantization_nm` and `relegation_factor`.
struct Scenario {
  std::string controller = "pid";  // reference design name or spec file path
  std::string reference = "step3um";
  double noise_um = 0.0;
  std::uint64_t seed = 0;
  bool feedforward = false;
  bool feedback = true;
  double dt = 1e-4;
  double quantization_nm = 100.0;
  double relegation_factor = 100.0;  // feedforward poles at this multiple of omega_c
};

Scenario parse_scenario(const KeyValueFile& file);
Scenario load_scenario(const std::filesystem::path& path);

struct ScenarioOutcome {
  ControllerSpec controller;  // with K_p normalized against the plant model
  Reference reference;
  SimResult result;
  SimMetrics metrics;
};

/// Runs a scenario on the stage plant model.
ScenarioOutcome run_scenario(const Scenario& scenario);

}  // namespace resetloop
