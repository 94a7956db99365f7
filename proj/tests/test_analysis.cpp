#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "resetloop/analysis.hpp"
#include "resetloop/controllers.hpp"
#include "resetloop/units.hpp"

using namespace resetloop;
using Catch::Approx;

namespace {

using cd = std::complex<double>;

ControllerSpec integrator_controller(double gain) {
  ControllerSpec spec;
  spec.linear_parts.push_back(TransferFunction({1.0}, {1.0, 0.0}));
  spec.gain = gain;
  spec.design.kp = gain;
  return spec;
}

}  // namespace

TEST_CASE("linear controllers have no third harmonic", "[analysis]") {
  const auto grid = log_grid(hz_to_rad(1.0), hz_to_rad(1000.0), 10);
  const auto third = open_loop(assemble(reference_design("pid")), PlantResponse(stage_plant_model()), grid, 3);
  for (const cd v : third) CHECK(v == cd(0.0, 0.0));
  const ControllerSpec cloc = assemble(reference_design("cloc-1"));
  for (const cd v : cloc.response(grid, 2)) CHECK(v == cd(0.0, 0.0));
  CHECK_THROWS(open_loop(cloc, PlantResponse(stage_plant_model()), grid, 2));
}

TEST_CASE("integrator loop crossover and margin", "[analysis]") {
  const auto grid = log_grid(0.1, 1000.0);
  const PlantResponse unit(TransferFunction::gain(1.0));
  const OpenLoopView view = make_open_loop_view(integrator_controller(10.0), unit, grid, "integrator");
  CHECK(view.integrators == 1);
  const CrossoverResult cr = crossover_pm(view);
  CHECK(cr.omega_c == Approx(10.0).epsilon(1e-6));
  CHECK(cr.pm_deg == Approx(90.0).margin(1e-9));
  CHECK(cr.crossings == 1);

  const CrossoverResult doubled = crossover_pm(make_open_loop_view(integrator_controller(20.0), unit, grid, "x"));
  CHECK(doubled.omega_c > cr.omega_c);
}

TEST_CASE("stage loop crossover after normalization", "[analysis]") {
  const PlantResponse plant(stage_plant_model());
  const auto grid = log_grid(hz_to_rad(1.0), hz_to_rad(10000.0), 100);
  const ControllerSpec pid = assemble(reference_design("pid"));
  const ControllerSpec tuned = pid.with_kp(normalize_open_loop_gain(pid, plant, hz_to_rad(150.0)));
  const CrossoverResult cr = crossover_pm(make_open_loop_view(tuned, plant, grid, "pid"));
  CHECK(rad_to_hz(cr.omega_c) == Approx(150.0).margin(0.05));
  // Linear loop: the margin follows from the rational phase at the crossover.
  const double phase = rad_to_deg(std::arg(tuned.response(cr.omega_c) * plant.at(cr.omega_c)));
  CHECK(cr.pm_deg == Approx(180.0 + phase).margin(0.05));
}

TEST_CASE("normalized third harmonic is invariant to loop gain", "[analysis]") {
  const PlantResponse plant(stage_plant_model());
  const auto grid = log_grid(hz_to_rad(10.0), hz_to_rad(1000.0), 20);
  const ControllerSpec base = assemble(reference_design("cglp-pi"));
  const NormalizedThird ref = normalized_third(make_open_loop_view(base, plant, grid, "a"));
  for (double factor : {0.5, 2.0, 10.0}) {
    const NormalizedThird scaled = normalized_third(make_open_loop_view(base.with_kp(factor), plant, grid, "b"));
    REQUIRE(scaled.ratio.size() == ref.ratio.size());
    for (std::size_t i = 0; i < ref.ratio.size(); ++i) CHECK(scaled.ratio[i] == Approx(ref.ratio[i]).epsilon(1e-12));
  }
}

TEST_CASE("linear open loop is the product of its parts", "[analysis]") {
  const PlantResponse plant(stage_plant_model());
  const auto grid = log_grid(hz_to_rad(1.0), hz_to_rad(1000.0), 10);
  const ControllerSpec lin = assemble(reference_design("cloc-2")).linearized();
  const auto ol = open_loop(lin, plant, grid, 1);
  const StateSpace ss = lin.full_state_space();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const cd expected = ss.at_omega(grid[i]) * stage_plant_model().at_omega(grid[i]);
    CHECK(std::abs(ol[i] - expected) <= 1e-9 * std::abs(expected));
  }
}

TEST_CASE("third harmonic uses the plant at three times the frequency", "[analysis]") {
  const PlantResponse plant(stage_plant_model());
  const ControllerSpec cglp = assemble(reference_design("cglp-pid"));
  const double w = hz_to_rad(100.0);
  const double grid[] = {w};
  const cd got = open_loop(cglp, plant, grid, 3).front();
  cd linear = cglp.gain;
  for (const auto& part : cglp.linear_parts) linear *= part.at_omega(3.0 * w);
  const cd expected = hosidf_at(*cglp.reset_part, w, 3) * linear * plant.at(3.0 * w);
  CHECK(std::abs(got - expected) <= 1e-12 * std::abs(expected));
}

TEST_CASE("FRF plants end the open loop at their last sample", "[analysis]") {
  const auto data = log_grid(hz_to_rad(1.0), hz_to_rad(500.0), 100);
  const PlantResponse frf(freq_response(stage_plant_model(), data), "measured");
  const auto grid = log_grid(hz_to_rad(10.0), hz_to_rad(400.0), 10);
  const auto third = open_loop(assemble(reference_design("cloc-1")), frf, grid, 3);
  CHECK(std::isfinite(third.front().real()));
  CHECK(std::isnan(third.back().real()));
}

TEST_CASE("open-loop CSV output", "[analysis]") {
  const auto grid = log_grid(hz_to_rad(10.0), hz_to_rad(100.0), 5);
  const OpenLoopView view = make_open_loop_view(assemble(reference_design("pid")), PlantResponse(stage_plant_model()), grid, "pid");
  std::ostringstream out;
  write_open_loop_csv(out, view);
  const std::string text = out.str();
  CHECK(text.rfind("freq_hz,harmonic,mag_db,phase_deg\n", 0) == 0);
  CHECK(text.find(",3,") == std::string::npos);
}
