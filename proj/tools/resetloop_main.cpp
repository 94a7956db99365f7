// resetloop: describing functions, tuning, simulation and the reproduction bundle.

#include <cstdio>
#include <exception>

#include <CLI11.hpp>

#include "resetloop/cli/commands.hpp"
#include "resetloop/cli/manifest.hpp"
#include "resetloop/errors.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

void add_grid_options(CLI::App* cmd, resetloop::cli::GridOptions& grid) {
  cmd->add_option("--fmin-hz", grid.fmin_hz, "Lowest frequency in Hz")->capture_default_str();
  cmd->add_option("--fmax-hz", grid.fmax_hz, "Highest frequency in Hz")->capture_default_str();
  cmd->add_option("--points-per-decade", grid.points_per_decade, "Grid density")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace resetloop::cli;
  CLI::App app{"Reset control analysis and synthesis"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  DfOptions df;
  auto* df_cmd = app.add_subcommand("df", "Describing function and higher harmonics of a reset system or controller");
  df_cmd->add_option("spec", df.spec, "Builtin element, reference design name or spec file")->required();
  add_grid_options(df_cmd, df.grid);
  df_cmd->add_option("--harmonics", df.harmonics, "Harmonic orders")->capture_default_str();
  df_cmd->add_flag("--linear", df.linear, "Set every reset factor to 1");
  df_cmd->add_option("--out", df.out, "Output directory")->capture_default_str();

  BodeOptions bode;
  auto* bode_cmd = app.add_subcommand("bode", "Linear frequency response, optionally with the open loop");
  bode_cmd->add_option("spec", bode.spec, "Builtin element, reference design name or spec file")->required();
  add_grid_options(bode_cmd, bode.grid);
  bode_cmd->add_option("--plant", bode.plant, "'model' or an FRF csv file");
  bode_cmd->add_option("--out", bode.out, "Output directory")->capture_default_str();

  TuneCliOptions tune;
  auto* tune_cmd = app.add_subcommand("tune", "Grid search of the reset factors of a CLOC ladder");
  tune_cmd->add_option("skeleton", tune.skeleton, "cloc-1, cloc-2 or a cloc spec file")->required();
  tune_cmd->add_option("--target-gain-slope", tune.target_gain_slope, "dB/decade")->capture_default_str();
  tune_cmd->add_option("--target-phase-slope", tune.target_phase_slope, "deg/decade")->capture_default_str();
  tune_cmd->add_option("--delta", tune.delta, "Grid step in (0, 2]")->capture_default_str();
  tune_cmd->add_option("--local-radius", tune.local_radius, "Search only around the skeleton's gamma");
  tune_cmd->add_flag("!--no-refine", tune.refine, "Skip the fine pass around the best grid points");
  tune_cmd->add_option("--threads", tune.threads, "Worker threads (0 = all cores)");
  tune_cmd->add_option("--out", tune.out, "Output directory")->capture_default_str();

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Closed-loop simulation of a scenario file");
  sim_cmd->add_option("scenario", sim.scenario, "Scenario file")->required();
  sim_cmd->add_option("--out", sim.out, "Output directory")->capture_default_str();

  ReproduceOptions rep;
  auto* rep_cmd = app.add_subcommand("reproduce", "Regenerate every dataset with a checksum manifest");
  rep_cmd->add_option("--out", rep.out, "Output directory")->capture_default_str();
  rep_cmd->add_option("--seed", rep.seed, "Noise seed")->capture_default_str();
  rep_cmd->add_option("--plant", rep.plant_frf, "FRF csv file for an additional open-loop dataset");
  rep_cmd->add_option("--threads", rep.threads, "Worker threads (0 = all cores)");
  rep_cmd->add_flag("--quick", rep.quick, "Fewer oracle frequencies");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*df_cmd) cmd_df(df);
    else if (*bode_cmd) cmd_bode(bode);
    else if (*tune_cmd) cmd_tune(tune);
    else if (*sim_cmd) cmd_simulate(sim);
    else if (*rep_cmd) cmd_reproduce(rep);
  } catch (const resetloop::InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  } catch (const resetloop::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  }
  return kExitOk;
}
