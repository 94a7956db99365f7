#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "resetloop/analysis.hpp"
#include "resetloop/cli/commands.hpp"
#include "resetloop/cli/manifest.hpp"
#include "resetloop/errors.hpp"
#include "resetloop/frf_io.hpp"
#include "resetloop/harmonic_oracle.hpp"
#include "resetloop/key_value.hpp"
#include "resetloop/simulation.hpp"
#include "resetloop/spec_file.hpp"
#include "resetloop/synthesis.hpp"
#include "resetloop/tuning.hpp"
#include "resetloop/units.hpp"

namespace resetloop::cli {
namespace {

std::string fmt(const char* format, auto... args) {
  char buffer[512];
  std::snprintf(buffer, sizeof buffer, format, args...);
  return buffer;
}

// Runs jobs on up to `threads` workers; results keep job order.
template <typename T>
std::vector<T> run_pool(const std::vector<std::function<T()>>& jobs, unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<T> out(jobs.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::future<void>> workers;
  for (unsigned t = 0; t < std::min<std::size_t>(threads, jobs.size()); ++t)
    workers.push_back(std::async(std::launch::async, [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) out[i] = jobs[i]();
    }));
  for (auto& w : workers) w.get();
  return out;
}

std::string harmonic_csv(const std::vector<HarmonicResponse>& responses) {
  std::ostringstream out;
  write_harmonic_csv(out, responses);
  return out.str();
}

std::string bode_csv(const std::vector<double>& grid, std::vector<std::complex<double>> values) {
  FrequencyResponse fr{grid, std::move(values), std::vector<bool>(grid.size(), false)};
  std::ostringstream out;
  write_bode_csv(out, fr);
  return out.str();
}

void clegg_dataset(RunManifest& m) {
  const ResetSystem clegg = clegg_integrator(0.0);
  const auto grid = log_grid(hz_to_rad(0.01), hz_to_rad(100.0));
  m.write("clegg/harmonics.csv", harmonic_csv(harmonic_spectrum(clegg, grid, 11)));
  std::string text = "# describing function scaled by omega, and third-to-first harmonic ratio\n";
  text += "freq_hz,omega_times_mag,phase_deg,ratio_3_1\n";
  for (double f : {0.01, 0.1, 1.0, 10.0, 100.0}) {
    const double w = hz_to_rad(f);
    const auto g1 = describing_function_at(clegg, w);
    const auto g3 = hosidf_at(clegg, w, 3);
    text += fmt("%g,%.9f,%.6f,%.9f\n", f, std::abs(g1) * w, phase_deg(g1), std::abs(g3) / std::abs(g1));
  }
  m.write("clegg/closed_form_check.csv", text);
}

void cglp_dataset(RunManifest& m) {
  const auto grid = log_grid(hz_to_rad(1.0), hz_to_rad(10000.0));
  for (const std::string name : {"cglp-fore", "cglp-sore"}) {
    const ControllerSpec spec = resolve_system(name);
    m.write("cglp/" + name + "_df.csv", harmonic_csv({{grid, 1, spec.response(grid, 1)}, {grid, 3, spec.response(grid, 3)}}));
    m.write("cglp/" + name + "_linear.csv", bode_csv(grid, spec.linearized().response(grid, 1)));
  }
}

void complex_order_dataset(RunManifest& m, std::string& summary) {
  std::string placement = "ladder,band_lo_hz,band_hi_hz,poles_hz,zeros_hz\n";
  std::string slopes = "ladder,mode,fit_lo_hz,fit_hi_hz,gain_slope_db_per_dec,phase_slope_deg_per_dec\n";
  for (const std::string name : {"cloc-1", "cloc-2"}) {
    const ControllerDesign d = reference_design(name);
    const CroneApprox placed =
        crone_place(-0.5, {hz_to_rad(*d.omega_l_hz), hz_to_rad(*d.omega_h_hz), static_cast<int>(d.poles_hz.size())});
    std::vector<double> p, z;
    for (double v : placed.poles) p.push_back(rad_to_hz(v));
    for (double v : placed.zeros) z.push_back(rad_to_hz(v));
    placement += fmt("%s,%g,%g,\"%s\",\"%s\"\n", name.c_str(), *d.omega_l_hz, *d.omega_h_hz, format_array(p).c_str(),
                     format_array(z).c_str());

    const CroneApprox ladder = cloc_ladder(d);
    const auto [lo, hi] = trimmed_fit_band(ladder);
    const auto grid = log_grid(ladder.poles.front() / 10.0, ladder.zeros.back() * 10.0);
    for (const bool linear : {true, false}) {
      const ComplexOrderFilter filter = split_reset(ladder, linear ? std::vector<double>(d.gamma.size(), 1.0) : d.gamma);
      std::vector<std::complex<double>> v1, v3;
      for (double w : grid) {
        v1.push_back(filter.response(w, 1));
        v3.push_back(filter.response(w, 3));
      }
      const std::string mode = linear ? "linear" : "reset";
      m.write("complex_order/" + name + "_" + mode + ".csv", harmonic_csv({{grid, 1, v1}, {grid, 3, v3}}));
      const SlopeFit fit = slope_estimate(grid, v1, lo, hi);
      slopes += fmt("%s,%s,%.4f,%.4f,%.4f,%.4f\n", name.c_str(), mode.c_str(), rad_to_hz(lo), rad_to_hz(hi),
                    fit.slopes.gain_db_per_decade, fit.slopes.phase_deg_per_decade);
      if (!linear)
        summary += fmt("%s complex-order filter slopes: %.2f dB/dec, %.2f deg/dec\n", name.c_str(),
                       fit.slopes.gain_db_per_decade, fit.slopes.phase_deg_per_decade);
    }
  }
  std::string orders = "alpha,beta,gain_slope_db_per_dec,phase_slope_deg_per_dec\n";
  for (const ComplexOrder o : {ComplexOrder{-0.5, 0.9475}, ComplexOrder{-0.5, 1.1370}}) {
    const SlopePair s = order_to_slopes(o);
    orders += fmt("%g,%g,%.4f,%.4f\n", o.alpha, o.beta, s.gain_db_per_decade, s.phase_deg_per_decade);
  }
  m.write("complex_order/placement.csv", placement);
  m.write("complex_order/slopes.csv", slopes);
  m.write("complex_order/order_to_slopes.csv", orders);
}

struct OracleRow {
  std::string line;
  double worst_mag = 0.0;    // relative, odd orders
  double worst_phase = 0.0;  // degrees, odd orders
};

void oracle_dataset(RunManifest& m, unsigned threads, bool quick, std::string& summary) {
  std::vector<std::function<OracleRow()>> jobs;
  const double omega_r = hz_to_rad(10.0);
  const int count = quick ? 3 : 10;
  std::vector<double> freqs;
  for (int i = 0; i < count; ++i)
    freqs.push_back(omega_r * std::pow(10.0, -1.0 + 2.0 * i / std::max(1, count - 1)));
  for (const std::string element : {"fore", "sore"}) {
    for (double gamma : {-0.5, 0.0, 0.5}) {
      for (double w : freqs) {
        jobs.push_back([=] {
          const ResetSystem rs = element == "fore" ? first_order_reset(omega_r, gamma)
                                                   : second_order_reset(omega_r, 1.0, gamma);
          const OracleResult oracle = steady_state_harmonics(rs, w, 5);
          OracleRow row;
          for (int n = 1; n <= 5; ++n) {
            const std::complex<double> closed = hosidf_at(rs, w, n);
            const std::complex<double> measured = oracle.harmonics[static_cast<std::size_t>(n - 1)];
            if (n % 2) {
              row.worst_mag = std::max(row.worst_mag, std::abs(std::abs(measured) / std::abs(closed) - 1.0));
              row.worst_phase = std::max(row.worst_phase, std::abs(std::remainder(phase_deg(measured) - phase_deg(closed), 360.0)));
            }
            row.line += fmt("%s,%g,%.6g,%d,%.9g,%.6f,%.9g,%.6f,%g\n", element.c_str(), gamma, rad_to_hz(w), n,
                        std::abs(closed), n % 2 ? phase_deg(closed) : 0.0, std::abs(measured),
                        phase_deg(measured), oracle.resets_per_period);
          }
          return row;
        });
      }
    }
  }
  std::string csv = "element,gamma,freq_hz,order,closed_mag,closed_phase_deg,oracle_mag,oracle_phase_deg,resets_per_period\n";
  double worst_mag = 0.0, worst_phase = 0.0;
  for (const auto& row : run_pool(jobs, threads)) {
    csv += row.line;
    worst_mag = std::max(worst_mag, row.worst_mag);
    worst_phase = std::max(worst_phase, row.worst_phase);
  }
  m.write("oracle/harmonics_vs_oracle.csv", csv);
  summary += fmt("oracle cross-check: %zu cases, worst odd-harmonic deviation %.3g%% magnitude, %.3g deg phase\n",
                 jobs.size(), 100.0 * worst_mag, worst_phase);
}

struct Designed {
  std::string name;
  ControllerSpec spec;
};

std::vector<Designed> design_all(const PlantResponse& model) {
  std::vector<Designed> out;
  for (const auto& name : reference_design_names()) {
    ControllerSpec spec = assemble(reference_design(name));
    spec = spec.with_kp(normalize_open_loop_gain(spec, model, hz_to_rad(spec.design.omega_c_hz)));
    out.push_back({name, std::move(spec)});
  }
  return out;
}

void designs_dataset(RunManifest& m, const std::vector<Designed>& designs, std::string& summary) {
  std::string table = "controller,kp\n";
  for (const auto& d : designs) {
    const std::string text = format_design(d.spec.design);
    m.write("designs/" + d.name + ".spec", text);
    std::istringstream in(text);
    if (!(parse_design(in, d.name) == d.spec.design)) throw NumericalError("spec round trip failed for " + d.name);
    table += d.name + "," + format_shortest(d.spec.design.kp) + "\n";
  }
  m.write("designs/kp.csv", table);
  summary += "design spec files round-trip: yes\n";
}

void loop_dataset(RunManifest& m, const std::vector<Designed>& designs, const PlantResponse& plant,
                  const std::string& tag, std::string& summary) {
  const std::vector<double> grid =
      plant.is_model() ? log_grid(hz_to_rad(1.0), hz_to_rad(5000.0)) : plant.native_grid();
  std::string report = "controller,plant,crossover_hz,phase_margin_deg,crossings\n";
  for (const auto& d : designs) {
    ControllerSpec spec = d.spec;
    if (!plant.is_model()) spec = spec.with_kp(normalize_open_loop_gain(spec, plant, hz_to_rad(spec.design.omega_c_hz)));
    const OpenLoopView view = make_open_loop_view(spec, plant, grid, d.name);
    std::ostringstream ol, nt;
    write_open_loop_csv(ol, view);
    write_normalized_third_csv(nt, normalized_third(view));
    m.write(tag + "/open_loop_" + d.name + ".csv", ol.str());
    m.write(tag + "/normalized_third_" + d.name + ".csv", nt.str());
    const CrossoverResult x = crossover_pm(view);
    report += fmt("%s,%s,%.4f,%.4f,%d\n", d.name.c_str(), plant.source().c_str(), rad_to_hz(x.omega_c), x.pm_deg,
                  x.crossings);
    summary += fmt("%s on %s: crossover %.2f Hz, phase margin %.2f deg\n", d.name.c_str(), plant.source().c_str(),
                   rad_to_hz(x.omega_c), x.pm_deg);
  }
  m.write(tag + "/crossover.csv", report);
}

void step_dataset(RunManifest& m, const std::vector<Designed>& designs, unsigned threads, std::string& summary) {
  std::vector<std::function<std::pair<std::string, SimMetrics>()>> jobs;
  for (const auto& d : designs) {
    jobs.push_back([&d] {
      const Reference ref = named_reference("step3um");
      SimConfig cfg;
      cfg.duration = ref.sim_duration;
      const SimResult res = simulate_closed_loop(tf_to_ss(stage_plant_model()), d.spec, ref.trajectory, cfg);
      std::ostringstream csv;
      write_sim_csv(csv, res);
      return std::pair{csv.str(), metrics(res, ref.window_start, ref.window_end, ref.trajectory.distance())};
    });
  }
  const auto results = run_pool(jobs, threads);
  std::string table = "controller,overshoot,e_rms_100nm,e_max_100nm\n";
  for (std::size_t i = 0; i < designs.size(); ++i) {
    m.write("step/" + designs[i].name + ".csv", results[i].first);
    const SimMetrics& s = results[i].second;
    table += fmt("%s,%.6f,%.6f,%.6f\n", designs[i].name.c_str(), s.overshoot, s.e_rms / kTableUnit, s.e_max / kTableUnit);
    summary += fmt("%s 3 um step overshoot: %.4f\n", designs[i].name.c_str(), s.overshoot);
  }
  m.write("step/overshoot.csv", table);
}

void tracking_dataset(RunManifest& m, std::uint64_t seed, unsigned threads) {
  struct Row {
    std::string controller, reference;
    double noise_um;
    bool feedforward;
  };
  std::vector<Row> rows;
  for (const auto& name : reference_design_names())
    for (const std::string ref : {"ref1", "ref2", "ref3"})
      for (double noise : {0.0, 2.0})
        for (bool ff : {false, true}) rows.push_back({name, ref, noise, ff});

  std::vector<std::function<std::string()>> jobs;
  for (const auto& row : rows) {
    jobs.push_back([row, seed] {
      Scenario s;
      s.controller = row.controller;
      s.reference = row.reference;
      s.noise_um = row.noise_um;
      s.seed = seed;
      s.feedforward = row.feedforward;
      try {
        const ScenarioOutcome out = run_scenario(s);
        return fmt("%s,%s,%g,%s,%.4f,%.4f\n", row.controller.c_str(), row.reference.c_str(), row.noise_um,
                   row.feedforward ? "on" : "off", out.metrics.e_rms / kTableUnit, out.metrics.e_max / kTableUnit);
      } catch (const NumericalError& e) {
        return fmt("%s,%s,%g,%s,diverged,diverged\n", row.controller.c_str(), row.reference.c_str(), row.noise_um,
                   row.feedforward ? "on" : "off");
      }
    });
  }
  std::string csv = "# simulation, not hardware; errors in units of 100 nm\n";
  csv += "controller,reference,noise_um,feedforward,e_rms,e_max\n";
  for (const auto& line : run_pool(jobs, threads)) csv += line;
  m.write("tracking/simulated_performance.csv", csv);
}

void tuning_dataset(RunManifest& m, unsigned threads, std::string& summary) {
  const ControllerDesign d = reference_design("cloc-1");
  const CroneApprox ladder = cloc_ladder(d);
  const SlopePair target = order_to_slopes({-0.5, 0.9475});
  std::string report = "mode,gamma,objective,gain_slope,phase_slope\n";
  auto row = [&](const std::string& mode, const TunePoint& p) {
    report += fmt("%s,\"%s\",%.6g,%.4f,%.4f\n", mode.c_str(), format_array(p.gamma).c_str(), p.objective,
                  p.slopes.gain_db_per_decade, p.slopes.phase_deg_per_decade);
  };
  TuneOptions global;
  global.threads = threads;
  const TuneResult g = tune_arho(ladder, target, global);
  row("global_best", g.best);
  for (const auto& p : g.top) row("global_grid", p);

  TuneOptions local;
  local.threads = threads;
  local.delta = 0.01;
  local.refine = false;
  local.center = d.gamma;
  local.radius = 0.05;
  const TuneResult l = tune_arho(ladder, target, local);
  row("local_best", l.best);
  const ArhoObjective objective(ladder, target, local);
  const TunePoint table = objective.evaluate(d.gamma);
  row("table_gamma", table);
  m.write("tuning/cloc-1.csv", report);
  summary += fmt("tuner: global best objective %.4g, local best %.4g, table gamma %.4g\n", g.best.objective,
                 l.best.objective, table.objective);
}

}  // namespace

void cmd_reproduce(const ReproduceOptions& o) {
  RunManifest manifest("reproduce", o.out, o.seed);
  std::string summary = "Reproduction bundle (tool version " + std::string(kToolVersion) + ")\n";
  summary += "Tracking metrics are from simulation, not hardware.\n\n";
  try {
    clegg_dataset(manifest);
    cglp_dataset(manifest);
    complex_order_dataset(manifest, summary);
    oracle_dataset(manifest, o.threads, o.quick, summary);

    const PlantResponse model(stage_plant_model());
    const std::vector<Designed> designs = design_all(model);
    designs_dataset(manifest, designs, summary);
    loop_dataset(manifest, designs, model, "open_loop", summary);
    if (o.plant_frf) {
      manifest.add_input(*o.plant_frf);
      loop_dataset(manifest, designs, PlantResponse(load_frf(*o.plant_frf), o.plant_frf->string()), "open_loop_frf",
                   summary);
    }
    step_dataset(manifest, designs, o.threads, summary);
    tracking_dataset(manifest, o.seed, o.threads);
    tuning_dataset(manifest, o.threads, summary);
    manifest.write("summary.txt", summary);
  } catch (...) {
    manifest.finish(false);
    throw;
  }
  manifest.finish(true);
}

}  // namespace resetloop::cli
