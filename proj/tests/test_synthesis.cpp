#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "resetloop/controllers.hpp"
#include "resetloop/errors.hpp"
#include "resetloop/spec_file.hpp"
#include "resetloop/synthesis.hpp"
#include "resetloop/tuning.hpp"
#include "resetloop/units.hpp"

using namespace resetloop;
using Catch::Approx;

namespace {

using cd = std::complex<double>;

// Half a unit in the third significant digit of `table`.
bool matches_3sf(double value, double table) {
  const double unit = std::pow(10.0, std::floor(std::log10(std::abs(table))) - 2.0);
  return std::abs(value - table) <= 0.5 * unit + 1e-12;
}

struct BandFit {
  double lo_hz;
  double hi_hz;
};

// Exhaustive search over a log grid of (omega_l, omega_h) minimizing the squared
// log error between the ladder formula and listed corners.
BandFit brute_force_band(const std::vector<double>& poles_hz, const std::vector<double>& zeros_hz, double alpha) {
  const int n = static_cast<int>(poles_hz.size());
  BandFit best{0.0, 0.0};
  double best_cost = std::numeric_limits<double>::infinity();
  const double step = 2e-4;  // decades
  for (double ll = std::log10(5.0); ll <= std::log10(50.0); ll += step) {
    for (double lh = std::log10(300.0); lh <= std::log10(3000.0); lh += step) {
      double cost = 0.0;
      for (int m = 1; m <= n; ++m) {
        const double kz = (2.0 * m - 1.0 - alpha) / (2.0 * n);
        const double kp = (2.0 * m - 1.0 + alpha) / (2.0 * n);
        const double ez = ll + kz * (lh - ll) - std::log10(zeros_hz[m - 1]);
        const double ep = ll + kp * (lh - ll) - std::log10(poles_hz[m - 1]);
        cost += ez * ez + ep * ep;
      }
      if (cost < best_cost) {
        best_cost = cost;
        best = {std::pow(10.0, ll), std::pow(10.0, lh)};
      }
    }
  }
  return best;
}

double direct_pid_kp(double fc, double a, double fi, double ff) {
  const double wc = 2.0 * kPi * fc;
  const cd s(0.0, wc);
  const double wd = wc / a, wt = wc * a, wi = 2.0 * kPi * fi, wf = 2.0 * kPi * ff;
  const cd c = (1.0 + wi / s) * (1.0 + s / wd) / (1.0 + s / wt) / (1.0 + s / wf);
  const cd p = 1.429e8 / (175.9 * s * s + 7738.0 * s + 1.361e6);
  return 1.0 / std::abs(c * p);
}

}  // namespace

TEST_CASE("ladder corners follow the recursive placement", "[synthesis]") {
  const ApproxBand band{hz_to_rad(10.0), hz_to_rad(1000.0), 4};
  const CroneApprox c = crone_place(-0.3, band);
  REQUIRE(c.zeros.size() == 4);
  const double r = std::pow(100.0, 1.0 / 4.0);
  for (std::size_t m = 0; m < 4; ++m) {
    CHECK(c.zeros[m] > band.omega_l);
    CHECK(c.poles[m] < band.omega_h);
    CHECK(c.zeros[m] / c.poles[m] == Approx(std::pow(100.0, 0.3 / 4.0)).epsilon(1e-12));
    if (m > 0) {
      CHECK(c.poles[m] / c.poles[m - 1] == Approx(r).epsilon(1e-12));
      CHECK(c.zeros[m] / c.zeros[m - 1] == Approx(r).epsilon(1e-12));
    }
  }
  const CroneApprox flat = crone_place(0.0, band);
  for (std::size_t m = 0; m < 4; ++m) CHECK(flat.zeros[m] == Approx(flat.poles[m]));
  CHECK_THROWS_AS(crone_place(-0.5, ApproxBand{10.0, 5.0, 2}), InputError);
  CHECK_THROWS_AS(crone_place(-0.5, ApproxBand{1.0, 5.0, 0}), InputError);
}

TEST_CASE("table ladders are reproduced from their fitted bands", "[synthesis]") {
  struct Row {
    std::vector<double> poles, zeros;
    double lo, hi;
  };
  const Row rows[] = {{{16.5, 76.6, 355.5}, {35.55, 165.0, 766.0}, 11.24, 1124.0},
                      {{27.0, 85.4, 270.0}, {48.0, 151.8, 480.3}, 20.25, 640.3}};
  for (const Row& row : rows) {
    const BandFit fit = brute_force_band(row.poles, row.zeros, -0.5);
    CHECK(fit.lo_hz == Approx(row.lo).epsilon(2e-3));
    CHECK(fit.hi_hz == Approx(row.hi).epsilon(2e-3));
    const CroneApprox c = crone_place(-0.5, ApproxBand{hz_to_rad(row.lo), hz_to_rad(row.hi), 3});
    for (std::size_t m = 0; m < 3; ++m) {
      CHECK(matches_3sf(rad_to_hz(c.poles[m]), row.poles[m]));
      CHECK(matches_3sf(rad_to_hz(c.zeros[m]), row.zeros[m]));
    }
  }
}

TEST_CASE("ladder inference from corners", "[synthesis]") {
  const ApproxBand band{hz_to_rad(11.24), hz_to_rad(1124.0), 3};
  const CroneApprox placed = crone_place(-0.5, band);
  const CroneApprox inferred = crone_from_corners(placed.zeros, placed.poles);
  CHECK(inferred.alpha == Approx(-0.5).epsilon(1e-10));
  CHECK(inferred.band.omega_l == Approx(band.omega_l).epsilon(1e-10));
  CHECK(inferred.band.omega_h == Approx(band.omega_h).epsilon(1e-10));
  CHECK_THROWS_AS(crone_from_corners({2.0, 1.0}, {1.0, 3.0}), InputError);
}

TEST_CASE("linear ladder approximates a real-order derivative", "[synthesis]") {
  for (double alpha : {-0.5, -0.3, 0.4}) {
    const CroneApprox c = crone_place(alpha, ApproxBand{hz_to_rad(10.0), hz_to_rad(10000.0), 6});
    const auto grid = log_grid(hz_to_rad(1.0), hz_to_rad(1e5));
    const FrequencyResponse fr = freq_response(c.transfer_function(), grid);
    const SlopeFit fit = slope_estimate(fr, 3.0 * c.poles.front(), c.zeros.back() / 3.0);
    CHECK(fit.slopes.gain_db_per_decade == Approx(20.0 * alpha).margin(1.0));
    CHECK(std::abs(fit.slopes.phase_deg_per_decade) <= 5.0);
  }
}

TEST_CASE("reset split keeps poles and tames zeros", "[synthesis]") {
  const CroneApprox c = crone_place(-0.5, ApproxBand{hz_to_rad(11.24), hz_to_rad(1124.0), 3});
  const ComplexOrderFilter f = split_reset(c, {1.0, 1.0, 1.0});
  REQUIRE(f.taming_poles.size() == 3);
  for (double p : f.taming_poles) CHECK(p == Approx(20.0 * c.band.omega_h));
  for (double w : log_grid(10.0, 1e4, 5)) {
    const cd expected = c.transfer_function().at_omega(w);
    cd taming = 1.0;
    for (double p : f.taming_poles) taming /= 1.0 + cd(0.0, w / p);
    CHECK(std::abs(f.response(w) - expected * taming) <= 1e-10 * std::abs(expected));
    CHECK(f.response(w, 3) == cd(0.0, 0.0));
  }
  CHECK_THROWS_AS(split_reset(c, {1.0, 1.0}), InputError);
  CHECK_THROWS_AS(split_reset(c, {1.0, 1.0, 1.0}, 5.0), InputError);
}

TEST_CASE("slope regression on an exact power law", "[synthesis]") {
  const auto grid = log_grid(1.0, 1e4);
  std::vector<cd> values;
  for (double w : grid) values.push_back(std::pow(cd(0.0, w), -0.5));
  const SlopeFit fit = slope_estimate(grid, values, 10.0, 1000.0);
  CHECK(fit.slopes.gain_db_per_decade == Approx(-10.0).margin(1e-9));
  CHECK(std::abs(fit.slopes.phase_deg_per_decade) < 1e-9);
  CHECK(fit.samples == 101);
  CHECK_THROWS_AS(slope_estimate(grid, values, 10.0, 11.0), InputError);
}

TEST_CASE("complex order slope constants", "[synthesis]") {
  const double per_beta = 180.0 / kPi * std::log(10.0);
  CHECK(per_beta == Approx(131.93).margin(0.005));
  const SlopePair a = order_to_slopes({-0.5, 0.9475});
  CHECK(a.gain_db_per_decade == -10.0);
  CHECK(a.phase_deg_per_decade == Approx(125.0).margin(0.05));
  const SlopePair b = order_to_slopes({-0.5, 1.1370});
  CHECK(b.phase_deg_per_decade == Approx(150.0).margin(0.05));
}

TEST_CASE("PID corners and sections", "[synthesis]") {
  const double wc = hz_to_rad(150.0);
  const PidFrequencies pf = pid_corners(wc, 9.13);
  CHECK(pf.omega_d * pf.omega_t == Approx(wc * wc));
  CHECK(rad_to_hz(pf.omega_t) == Approx(1369.5));
  const ControllerSpec pid = build_pid(wc, 9.13, hz_to_rad(15.0), hz_to_rad(1500.0));
  CHECK(pid.linear_parts.size() == 3);
  CHECK(pid.integrators() == 1);
  CHECK_FALSE(pid.has_reset());
  const ControllerSpec pi = build_pid(wc, 1.0, hz_to_rad(15.0), hz_to_rad(1500.0));
  CHECK(pi.linear_parts.size() == 2);
  CHECK_THROWS_AS(build_pid(wc, 0.5, hz_to_rad(15.0), hz_to_rad(1500.0)), InputError);
  CHECK_THROWS_AS(build_pid(wc, 9.13, hz_to_rad(20.0), hz_to_rad(1300.0)), InputError);
}

TEST_CASE("CgLp lead cancels the reset lag in the linear limit", "[synthesis]") {
  for (int order : {1, 2}) {
    const double wr = 100.0, wf = 1e6;
    const CglpElement e = build_cglp(order, wr, wr, 1.0, wf, 1.0);
    for (double w : {1.0, 30.0, 300.0, 3000.0}) {
      const cd taming = std::pow(1.0 + cd(0.0, w / wf), order);
      const cd total = describing_function_at(e.reset, w) * e.lead.at_omega(w) * taming;
      CHECK(std::abs(total - 1.0) < 1e-12);
    }
  }
  CHECK_THROWS_AS(build_cglp(3, 10.0, 10.0, 1.0, 100.0, 0.0), InputError);
  CHECK_THROWS_AS(build_cglp(1, 10.0, 20.0, 1.0, 100.0, 0.0), InputError);
}

TEST_CASE("CgLp gives a flat gain with phase lead above its corner", "[synthesis]") {
  const double wr = 1.0, wf = 1e9;
  const CglpElement e = build_cglp(1, wr, wr, 1.0, wf, 0.0);
  auto at = [&](double w) { return describing_function_at(e.reset, w) * e.lead.at_omega(w); };
  CHECK(std::abs(at(1e4)) == Approx(std::abs(at(3e4))).epsilon(1e-3));
  CHECK(std::abs(at(1e4)) == Approx(std::sqrt(1.0 + 16.0 / (kPi * kPi))).epsilon(1e-3));
  CHECK(phase_deg(at(1e4)) == Approx(90.0 - rad_to_deg(std::atan(kPi / 4.0))).margin(0.1));
}

TEST_CASE("CLOC assembly", "[synthesis]") {
  const ControllerSpec cloc = build_cloc(1);
  REQUIRE(cloc.reset_part.has_value());
  CHECK(cloc.reset_part->resetting_states() == 3);
  CHECK(cloc.has_reset());
  CHECK(std::abs(cloc.linearized().response(hz_to_rad(150.0))) == Approx(1.0).epsilon(1e-12));
  const ControllerSpec doubled = cloc.with_kp(2.0);
  CHECK(std::abs(doubled.response(hz_to_rad(90.0))) == Approx(2.0 * std::abs(cloc.response(hz_to_rad(90.0)))));
  CHECK_THROWS_AS(build_cloc(3), InputError);
}

TEST_CASE("open-loop gain normalization", "[synthesis]") {
  const PlantResponse plant(stage_plant_model());
  const double wc = hz_to_rad(150.0);
  for (const std::string& name : reference_design_names()) {
    const ControllerSpec spec = assemble(reference_design(name));
    const double kp = normalize_open_loop_gain(spec, plant, wc);
    const ControllerSpec tuned = spec.with_kp(kp);
    CHECK(to_db(std::abs(tuned.response(wc) * plant.at(wc))) == Approx(0.0).margin(0.01));
    const PlantResponse doubled(series(TransferFunction::gain(2.0), stage_plant_model()));
    CHECK(normalize_open_loop_gain(spec, doubled, wc) == Approx(kp / 2.0).epsilon(1e-12));
  }
  const double kp = normalize_open_loop_gain(assemble(reference_design("pid")), plant, wc);
  CHECK(kp == Approx(direct_pid_kp(150.0, 9.13, 15.0, 1500.0)).epsilon(1e-12));
}

TEST_CASE("gamma axis", "[synthesis]") {
  const auto axis = gamma_axis(0.25);
  REQUIRE(axis.size() == 9);
  CHECK(axis.front() == -1.0);
  CHECK(axis.back() == Approx(1.0));
  CHECK(gamma_axis(2.0) == std::vector<double>{-1.0, 1.0});
  CHECK_THROWS_AS(gamma_axis(0.0), InputError);
}

TEST_CASE("tuner objective and optimality", "[synthesis]") {
  const CroneApprox skeleton = crone_place(-0.5, ApproxBand{hz_to_rad(20.0), hz_to_rad(640.0), 2});
  const SlopePair target = order_to_slopes({-0.5, 0.9475});
  TuneOptions opt;
  opt.delta = 0.5;
  opt.refine = false;
  opt.keep_all = true;
  const TuneResult res = tune_arho(skeleton, target, opt);
  CHECK(res.grid_points == 25);
  REQUIRE(res.evaluated.size() == 25);
  for (const TunePoint& p : res.evaluated) CHECK(res.best.objective <= p.objective);
  for (std::size_t k = 1; k < res.top.size(); ++k) CHECK(res.top[k - 1].objective <= res.top[k].objective);

  // The objective is the weighted squared slope error over the trimmed band.
  const ArhoObjective objective(skeleton, target, opt);
  const std::vector<double> g{0.5, -0.5};
  const TunePoint point = objective.evaluate(g);
  const ComplexOrderFilter filter = split_reset(skeleton, g);
  const auto grid = log_grid(objective.band_lo(), objective.band_hi());
  std::vector<cd> values;
  for (double w : grid) values.push_back(filter.response(w));
  const SlopeFit fit = slope_estimate(grid, values, objective.band_lo(), objective.band_hi());
  const double dg = fit.slopes.gain_db_per_decade - target.gain_db_per_decade;
  const double dp = fit.slopes.phase_deg_per_decade - target.phase_deg_per_decade;
  CHECK(point.objective == Approx(dg * dg + 0.04 * dp * dp).epsilon(1e-6));
  const auto [lo, hi] = trimmed_fit_band(skeleton);
  CHECK(objective.band_lo() == Approx(lo));
  CHECK(objective.band_hi() == Approx(hi));
  CHECK(lo == Approx(1.5 * skeleton.poles.front()));
}

TEST_CASE("refinement and local search never worsen the coarse best", "[synthesis]") {
  const CroneApprox skeleton = crone_place(-0.5, ApproxBand{hz_to_rad(20.0), hz_to_rad(640.0), 2});
  const SlopePair target = order_to_slopes({-0.5, 0.9475});
  TuneOptions coarse;
  coarse.delta = 0.25;
  coarse.refine = false;
  TuneOptions fine = coarse;
  fine.refine = true;
  const double a = tune_arho(skeleton, target, coarse).best.objective;
  const TuneResult b = tune_arho(skeleton, target, fine);
  CHECK(b.best.objective <= a);
  CHECK(b.refine_points > 0);

  TuneOptions local;
  local.delta = 0.05;
  local.refine = false;
  local.center = std::vector<double>{0.2, -0.2};
  local.radius = 0.1;
  local.keep_all = true;
  const TuneResult l = tune_arho(skeleton, target, local);
  CHECK(l.grid_points == 25);
  for (const TunePoint& p : l.evaluated)
    for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(p.gamma[i] - (*local.center)[i]) <= 0.1 + 1e-12);
}

TEST_CASE("spec files round-trip every design", "[synthesis]") {
  for (const std::string& name : reference_design_names()) {
    ControllerDesign d = reference_design(name);
    d.kp = 0.123456789012345;
    const ControllerDesign back = [&] {
      std::istringstream in(format_design(d));
      return parse_design(in);
    }();
    CHECK(back == d);
  }
  std::istringstream bad("kind = cloc\npoles_hz = [10, 20]\nzeros_hz = [15]\ngamma = [0, 0]\n");
  CHECK_THROWS_AS(parse_design(bad), InputError);
  std::istringstream unknown("kind = pid\nomega_x = 3\n");
  CHECK_THROWS_AS(parse_design(unknown), InputError);
}
