#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "resetloop/controllers.hpp"
#include "resetloop/errors.hpp"
#include "resetloop/frf_io.hpp"
#include "resetloop/lti.hpp"
#include "resetloop/matrix_exp.hpp"
#include "resetloop/units.hpp"

using namespace resetloop;
using Catch::Approx;

namespace {

double rel_err(std::complex<double> a, std::complex<double> b) { return std::abs(a - b) / std::abs(b); }

// Random stable transfer function with real poles and zeros in [1, 1000] rad/s.
TransferFunction random_stable_tf(std::mt19937& rng, int order) {
  std::uniform_real_distribution<double> log_corner(0.0, 3.0);
  std::uniform_int_distribution<int> zeros(0, order);
  Polynomial num{1.0}, den{1.0};
  const int nz = zeros(rng);
  for (int i = 0; i < order; ++i) den = poly::multiply(den, {1.0, std::pow(10.0, log_corner(rng))});
  for (int i = 0; i < nz; ++i) num = poly::multiply(num, {1.0, std::pow(10.0, log_corner(rng))});
  return {num, den};
}

}  // namespace

TEST_CASE("integrator realization", "[lti]") {
  const StateSpace ss = tf_to_ss(TransferFunction({1.0}, {1.0, 0.0}));
  REQUIRE(ss.order() == 1);
  CHECK(ss.a(0, 0) == 0.0);
  CHECK(ss.b(0) == 1.0);
  CHECK(ss.c(0) == 1.0);
  CHECK(ss.d == 0.0);
}

TEST_CASE("stage plant realization keeps the static gain", "[lti]") {
  const TransferFunction plant = stage_plant_model();
  const StateSpace ss = tf_to_ss(plant);
  REQUIRE(ss.order() == 2);
  const double expected = 1.429e8 / 1.361e6;
  CHECK(ss(0.0).real() == Approx(expected).epsilon(1e-12));
  CHECK(plant.dc_gain() == Approx(105.0).epsilon(1e-3));
  CHECK(to_db(std::abs(plant.at_omega(1e-6))) == Approx(40.4).margin(0.05));
}

TEST_CASE("pole-zero cancellation realizes as a unit feedthrough", "[lti]") {
  const StateSpace ss = tf_to_ss(TransferFunction({1.0, 1.0}, {1.0, 1.0}));
  CHECK(ss.d == 1.0);
  CHECK(ss.c(0) == 0.0);
  for (double w : {0.1, 1.0, 10.0}) CHECK(std::abs(ss.at_omega(w) - 1.0) < 1e-15);
}

TEST_CASE("improper transfer functions are rejected", "[lti]") {
  CHECK_THROWS_AS(tf_to_ss(TransferFunction({1.0, 0.0, 0.0}, {1.0, 1.0})), InputError);
  CHECK_THROWS_AS(TransferFunction({1.0}, {}), InputError);
  CHECK_THROWS_AS(TransferFunction({1.0}, {0.0, 1.0}), InputError);
}

TEST_CASE("frequency response identities", "[lti]") {
  const double grid[] = {1.0};
  const FrequencyResponse fr = freq_response(TransferFunction({1.0}, {1.0, 0.0}), grid);
  CHECK(std::abs(fr.values[0]) == Approx(1.0));
  CHECK(phase_deg(fr.values[0]) == Approx(-90.0));

  const double w0 = 40.0;
  const double at[] = {w0};
  const auto lag = freq_response(TransferFunction::first_order_lag(w0), at).values[0];
  CHECK(to_db(std::abs(lag)) == Approx(-3.0103).margin(1e-4));
  CHECK(phase_deg(lag) == Approx(-45.0).margin(1e-12));
}

TEST_CASE("imaginary-axis poles are flagged as singular samples", "[lti]") {
  const double grid[] = {0.5, 1.0, 2.0};
  const FrequencyResponse fr = freq_response(TransferFunction({1.0}, {1.0, 0.0, 1.0}), grid);
  CHECK_FALSE(fr.singular[0]);
  CHECK(fr.singular[1]);
  CHECK(std::isnan(fr.values[1].real()));
  CHECK_FALSE(fr.singular[2]);
}

TEST_CASE("series products", "[lti]") {
  const TransferFunction integ({1.0}, {1.0, 0.0});
  const TransferFunction double_integ = series(integ, integ);
  CHECK(double_integ.den() == Polynomial{1.0, 0.0, 0.0});
  CHECK(double_integ.num() == Polynomial{1.0});

  const double w0 = 7.0;
  const auto two = series(TransferFunction::first_order_lag(w0), TransferFunction::first_order_lag(w0)).at_omega(w0);
  CHECK(to_db(std::abs(two)) == Approx(-6.0206).margin(1e-4));
  CHECK(phase_deg(two) == Approx(-90.0).margin(1e-9));
}

TEST_CASE("series responses are pointwise products", "[lti]") {
  std::mt19937 rng(7);
  const auto grid = log_grid(0.1, 1e4, 20);
  for (int trial = 0; trial < 20; ++trial) {
    const TransferFunction a = random_stable_tf(rng, 1 + trial % 3);
    const TransferFunction b = random_stable_tf(rng, 1 + trial % 4);
    const auto tf = freq_response(series(a, b), grid);
    const auto ss = freq_response(series(tf_to_ss(a), tf_to_ss(b)), grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto expected = a.at_omega(grid[i]) * b.at_omega(grid[i]);
      CHECK(rel_err(tf.values[i], expected) < 1e-10);
      CHECK(rel_err(ss.values[i], expected) < 1e-10);
    }
  }
}

TEST_CASE("state-space realization matches rational evaluation", "[lti]") {
  std::mt19937 rng(11);
  const auto grid = log_grid(0.1, 1e4, 20);
  for (int trial = 0; trial < 30; ++trial) {
    const TransferFunction tf = random_stable_tf(rng, 1 + trial % 6);
    const StateSpace ss = tf_to_ss(tf);
    REQUIRE(ss.order() == tf.den_degree());
    const auto fr = freq_response(ss, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(rel_err(fr.values[i], tf.at_omega(grid[i])) < 1e-9);
  }
}

TEST_CASE("log grid density and endpoints", "[lti]") {
  const auto grid = log_grid(1.0, 100.0);
  CHECK(grid.size() == 101);
  CHECK(grid.front() == 1.0);
  CHECK(grid.back() == 100.0);
  CHECK_THROWS_AS(log_grid(0.0, 1.0), InputError);
  const std::vector<double> bad{1.0, 1.0};
  CHECK_THROWS_AS(validate_grid(bad), InputError);
}

TEST_CASE("phase unwrapping is continuous", "[lti]") {
  std::vector<std::complex<double>> v;
  for (int k = 0; k < 50; ++k) v.push_back(std::polar(1.0, -0.2 * k));
  const auto phase = unwrap_phase_deg(v);
  for (int k = 0; k < 50; ++k) CHECK(phase[k] == Approx(rad_to_deg(-0.2 * k)).margin(1e-9));
  const auto anchored = unwrap_phase_deg(v, -360.0);
  CHECK(anchored.front() == Approx(-360.0));
}

TEST_CASE("FRF parsing", "[lti]") {
  std::istringstream one("freq_hz,real,imag\n1.0, 1.0, 0.0\n");
  const FrequencyResponse fr = parse_frf(one);
  REQUIRE(fr.size() == 1);
  CHECK(fr.omega[0] == Approx(2.0 * kPi));
  CHECK(fr.values[0] == std::complex<double>(1.0, 0.0));

  std::istringstream comments("# measured\nfreq_hz,real,imag\n# note\n1,1,0\n2,0.5,-0.5\n");
  CHECK(parse_frf(comments).size() == 2);

  std::istringstream unsorted("freq_hz,real,imag\n2,1,0\n1,1,0\n");
  CHECK_THROWS_AS(parse_frf(unsorted), InputError);
  std::istringstream empty("freq_hz,real,imag\n");
  CHECK_THROWS_AS(parse_frf(empty), InputError);
  std::istringstream malformed("freq_hz,real,imag\n1,abc,0\n");
  try {
    parse_frf(malformed, "m.csv");
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("m.csv:2") != std::string::npos);
  }
}

TEST_CASE("FRF files round-trip the stage model", "[lti]") {
  const auto grid = log_grid(hz_to_rad(1.0), hz_to_rad(5000.0));
  const FrequencyResponse fr = freq_response(stage_plant_model(), grid);
  std::stringstream buffer;
  write_frf(buffer, fr);
  const FrequencyResponse back = parse_frf(buffer);
  REQUIRE(back.size() == fr.size());
  for (std::size_t i = 0; i < fr.size(); ++i) {
    CHECK(std::abs(back.omega[i] - fr.omega[i]) <= 1e-15 * fr.omega[i]);
    CHECK(back.values[i].real() == fr.values[i].real());
    CHECK(back.values[i].imag() == fr.values[i].imag());
    CHECK(rel_err(back.values[i], stage_plant_model().at_omega(grid[i])) < 1e-12);
  }
}

TEST_CASE("FRF plant interpolation", "[lti]") {
  const auto grid = log_grid(hz_to_rad(1.0), hz_to_rad(1000.0), 200);
  const PlantResponse frf(freq_response(stage_plant_model(), grid), "synthetic");
  const double w = hz_to_rad(150.0);
  CHECK(rel_err(frf.at(w), stage_plant_model().at_omega(w)) < 1e-3);
  CHECK_THROWS_AS(frf.at(hz_to_rad(2000.0)), InputError);
}

TEST_CASE("matrix exponential against an independent implementation", "[lti]") {
  std::mt19937 rng(3);
  std::normal_distribution<double> normal;
  for (double scale : {1e-3, 0.1, 1.0, 5.0, 40.0, 300.0}) {
    for (int n : {1, 2, 4, 7}) {
      Eigen::MatrixXd a(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = scale * normal(rng) / std::sqrt(n);
      a -= scale * Eigen::MatrixXd::Identity(n, n);  // keep the result bounded
      const Eigen::MatrixXd ours = expm(a);
      const Eigen::MatrixXd reference = a.exp();
      CHECK((ours - reference).norm() <= 1e-11 * std::max(1.0, reference.norm()));
    }
  }
  CHECK((expm(Eigen::MatrixXd::Zero(3, 3)) - Eigen::MatrixXd::Identity(3, 3)).norm() == 0.0);
}

TEST_CASE("zero-order-hold discretization of an integrator", "[lti]") {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Zero(1, 1);
  const Eigen::MatrixXd b = Eigen::MatrixXd::Ones(1, 1);
  const ZohDiscretization d = zoh_discretize(a, b, 0.25);
  CHECK(d.phi(0, 0) == Approx(1.0));
  CHECK(d.gamma(0, 0) == Approx(0.25));
}

TEST_CASE("balancing leaves the spectrum unchanged", "[lti]") {
  const StateSpace ss = tf_to_ss(series(TransferFunction::lead_lag(10.0, 1e5), TransferFunction::lead_lag(20.0, 1e5)));
  const Eigen::VectorXd d = balancing_scales(ss.a);
  const Eigen::MatrixXd balanced = d.cwiseInverse().asDiagonal() * ss.a * d.asDiagonal();
  CHECK(balanced.cwiseAbs().maxCoeff() < ss.a.cwiseAbs().maxCoeff());
  const Eigen::MatrixXd back = d.asDiagonal() * balanced.exp() * d.cwiseInverse().asDiagonal();
  CHECK((back - (ss.a).exp()).norm() <= 1e-9 * std::max(1.0, (ss.a).exp().norm()));
}
