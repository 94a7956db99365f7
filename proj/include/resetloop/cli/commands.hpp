#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "resetloop/controllers.hpp"

namespace resetloop::cli {

/// Builtin reset elements ("clegg", "fore", "sore", "cglp-fore", "cglp-sore"),
/// reference designs, or a controller spec file. K_p stays as given.
ControllerSpec resolve_system(const std::string& name_or_path);
std::vector<std::string> builtin_element_names();

struct GridOptions {
  double fmin_hz = 0.01;
  double fmax_hz = 100.0;
  double points_per_decade = 50.0;
};

struct DfOptions {
  std::string spec;
  GridOptions grid;
  std::vector<int> harmonics{1};
  bool linear = false;  // force every reset factor to 1
  std::filesystem::path out = "out";
};
void cmd_df(const DfOptions& options);

struct BodeOptions {
  std::string spec;
  GridOptions grid;
  std::optional<std::string> plant;  // "model" or an FRF file: also writes open-loop data
  std::filesystem::path out = "out";
};
void cmd_bode(const BodeOptions& options);

struct TuneCliOptions {
  std::string skeleton;
  double target_gain_slope = -10.0;
  double target_phase_slope = 125.0;
  double delta = 0.1;
  std::optional<double> local_radius;  // search around the skeleton's gamma
  bool refine = true;
  unsigned threads = 0;
  std::filesystem::path out = "out";
};
void cmd_tune(const TuneCliOptions& options);

struct SimulateOptions {
  std::filesystem::path scenario;
  std::filesystem::path out = "out";
};
void cmd_simulate(const SimulateOptions& options);

struct ReproduceOptions {
  std::filesystem::path out = "reproduction";
  std::uint64_t seed = 1;
  std::optional<std::filesystem::path> plant_frf;
  unsigned threads = 0;
  bool quick = false;  // fewer oracle frequencies
};
void cmd_reproduce(const ReproduceOptions& options);

}  // namespace resetloop::cli
