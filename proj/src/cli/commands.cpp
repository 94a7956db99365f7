#include "resetloop/cli/commands.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "resetloop/analysis.hpp"
#include "resetloop/cli/manifest.hpp"
#include "resetloop/errors.hpp"
#include "resetloop/frf_io.hpp"
#include "resetloop/key_value.hpp"
#include "resetloop/simulation.hpp"
#include "resetloop/spec_file.hpp"
#include "resetloop/tuning.hpp"
#include "resetloop/units.hpp"

namespace resetloop::cli {
namespace {

ControllerSpec element_spec(ResetSystem reset, std::vector<TransferFunction> linear = {}) {
  ControllerSpec spec;
  spec.design.gamma.assign(reset.gamma().begin(), reset.gamma().end());
  spec.reset_part = std::move(reset);
  spec.linear_parts = std::move(linear);
  return spec;
}

std::vector<double> make_grid(const GridOptions& g) {
  if (!(g.fmin_hz > 0.0) || !(g.fmax_hz > g.fmin_hz)) throw InputError("need 0 < fmin-hz < fmax-hz");
  return log_grid(hz_to_rad(g.fmin_hz), hz_to_rad(g.fmax_hz), g.points_per_decade);
}

PlantResponse resolve_plant(const std::string& plant) {
  if (plant == "model") return PlantResponse(stage_plant_model());
  return PlantResponse(load_frf(plant), plant);
}

std::string format_gamma(const std::vector<double>& gamma) { return format_array(gamma); }

}  // namespace

std::vector<std::string> builtin_element_names() { return {"clegg", "fore", "sore", "cglp-fore", "cglp-sore"}; }

ControllerSpec resolve_system(const std::string& name) {
  if (name == "clegg") return element_spec(clegg_integrator(0.0));
  if (name == "fore") return element_spec(first_order_reset(hz_to_rad(10.0), 0.0));
  if (name == "sore") return element_spec(second_order_reset(hz_to_rad(10.0), 1.0, 0.0));
  if (name == "cglp-fore" || name == "cglp-sore") {
    const ControllerDesign d = reference_design(name == "cglp-fore" ? "cglp-pid" : "cglp-pi");
    CglpElement e = build_cglp(d.reset_filter_order, hz_to_rad(d.omega_r_hz), hz_to_rad(d.omega_r_alpha_hz), d.beta_r,
                               hz_to_rad(d.omega_f_hz), d.gamma.front());
    return element_spec(std::move(e.reset), {std::move(e.lead)});
  }
  return assemble(resolve_design(name));
}

void cmd_df(const DfOptions& o) {
  RunManifest manifest("df", o.out);
  manifest.add_input(o.spec);
  ControllerSpec spec = resolve_system(o.spec);
  if (o.linear) spec = spec.linearized();
  const std::vector<double> grid = make_grid(o.grid);
  for (int n : o.harmonics) {
    if (n < 1) throw InputError("harmonic orders must be positive");
    const std::string name = "harmonic_" + std::to_string(n) + ".csv";
    if (n % 2 == 0) {
      manifest.write(name, "# order " + std::to_string(n) +
                               ": even harmonics of zero-crossing reset systems are identically zero\n"
                               "freq_hz,order,mag_db,phase_deg\n");
      continue;
    }
    const HarmonicResponse h{grid, n, spec.response(grid, n)};
    std::ostringstream out;
    write_harmonic_csv(out, std::span<const HarmonicResponse>(&h, 1));
    manifest.write(name, out.str());
  }
  manifest.finish();
}

void cmd_bode(const BodeOptions& o) {
  RunManifest manifest("bode", o.out);
  manifest.add_input(o.spec);
  ControllerSpec spec = resolve_system(o.spec);
  const std::vector<double> grid = make_grid(o.grid);
  FrequencyResponse fr{grid, spec.linearized().response(grid, 1), std::vector<bool>(grid.size(), false)};
  std::ostringstream bode;
  write_bode_csv(bode, fr);
  manifest.write("bode.csv", bode.str());

  if (o.plant) {
    if (*o.plant != "model") manifest.add_input(*o.plant);
    const PlantResponse plant = resolve_plant(*o.plant);
    const double omega_c = hz_to_rad(spec.design.omega_c_hz);
    spec = spec.with_kp(normalize_open_loop_gain(spec, plant, omega_c));
    const std::vector<double> ol_grid = plant.is_model() ? grid : plant.native_grid();
    const OpenLoopView view = make_open_loop_view(spec, plant, ol_grid, o.spec);
    std::ostringstream ol, nt, report;
    write_open_loop_csv(ol, view);
    write_normalized_third_csv(nt, normalized_third(view));
    const CrossoverResult x = crossover_pm(view);
    report << "controller " << o.spec << "\nplant " << plant.source() << "\nkp " << format_shortest(spec.design.kp)
           << "\ncrossover_hz " << rad_to_hz(x.omega_c) << "\nphase_margin_deg " << x.pm_deg << "\n";
    if (x.crossings > 1) report << "warning: " << x.crossings << " 0 dB crossings, the lowest was used\n";
    manifest.write("open_loop.csv", ol.str());
    manifest.write("normalized_third.csv", nt.str());
    manifest.write("crossover.txt", report.str());
  }
  manifest.finish();
}

void cmd_tune(const TuneCliOptions& o) {
  RunManifest manifest("tune", o.out);
  manifest.add_input(o.skeleton);
  ControllerDesign design = resolve_design(o.skeleton);
  if (design.kind != ControllerKind::cloc) throw InputError("tune: skeleton must be a cloc spec");
  const CroneApprox ladder = cloc_ladder(design);

  TuneOptions options;
  options.delta = o.delta;
  options.refine = o.refine;
  options.threads = o.threads;
  if (o.local_radius) {
    if (design.gamma.size() != ladder.poles.size()) throw InputError("tune: local search needs a gamma in the skeleton");
    options.center = design.gamma;
    options.radius = *o.local_radius;
  }
  const SlopePair target{o.target_gain_slope, o.target_phase_slope};
  const TuneResult result = tune_arho(ladder, target, options);

  design.gamma = result.best.gamma;
  manifest.write("tuned.spec", format_design(design));

  std::ostringstream report;
  char line[256];
  report << "target gain_slope_db_per_dec " << format_shortest(target.gain_db_per_decade)
         << " phase_slope_deg_per_dec " << format_shortest(target.phase_deg_per_decade) << "\n";
  std::snprintf(line, sizeof line, "fit band %.6g to %.6g Hz\n", rad_to_hz(result.band_lo), rad_to_hz(result.band_hi));
  report << line << "delta " << format_shortest(o.delta) << " grid_points " << result.grid_points << " refine_points "
         << result.refine_points << "\n";
  std::snprintf(line, sizeof line, "best gamma %s objective %.6g gain_slope %.4f phase_slope %.4f\n",
                format_gamma(result.best.gamma).c_str(), result.best.objective,
                result.best.slopes.gain_db_per_decade, result.best.slopes.phase_deg_per_decade);
  report << line << "best grid points:\n";
  for (const auto& p : result.top) {
    std::snprintf(line, sizeof line, "  %s objective %.6g gain_slope %.4f phase_slope %.4f\n",
                  format_gamma(p.gamma).c_str(), p.objective, p.slopes.gain_db_per_decade,
                  p.slopes.phase_deg_per_decade);
    report << line;
  }
  manifest.write("report.txt", report.str());
  manifest.finish();
}

void cmd_simulate(const SimulateOptions& o) {
  RunManifest manifest("simulate", o.out);
  manifest.add_input(o.scenario);
  const Scenario scenario = load_scenario(o.scenario);
  const ScenarioOutcome run = run_scenario(scenario);

  std::ostringstream csv;
  write_sim_csv(csv, run.result);
  manifest.write("sim.csv", csv.str());

  nlohmann::ordered_json doc;
  doc["controller"] = scenario.controller;
  doc["reference"] = scenario.reference;
  doc["noise_um"] = scenario.noise_um;
  doc["seed"] = scenario.seed;
  doc["feedforward"] = scenario.feedforward;
  doc["kp"] = run.controller.design.kp;
  doc["window_s"] = {run.reference.window_start, run.reference.window_end};
  doc["e_rms_m"] = run.metrics.e_rms;
  doc["e_max_m"] = run.metrics.e_max;
  doc["e_rms_100nm"] = run.metrics.e_rms / kTableUnit;
  doc["e_max_100nm"] = run.metrics.e_max / kTableUnit;
  doc["overshoot"] = run.metrics.overshoot;
  doc["resets"] = run.result.resets;
  manifest.write("metrics.json", doc.dump(2) + "\n");

  std::ostringstream text;
  char line[200];
  std::snprintf(line, sizeof line, "controller %s reference %s noise %.3g um feedforward %s\n",
                scenario.controller.c_str(), scenario.reference.c_str(), scenario.noise_um,
                scenario.feedforward ? "on" : "off");
  text << line;
  std::snprintf(line, sizeof line, "e_rms %.4f x 100 nm\ne_max %.4f x 100 nm\novershoot %.4f\nresets %zu\n",
                run.metrics.e_rms / kTableUnit, run.metrics.e_max / kTableUnit, run.metrics.overshoot,
                run.result.resets);
  text << line;
  manifest.write("metrics.txt", text.str());
  manifest.finish();
}

}  // namespace resetloop::cli
